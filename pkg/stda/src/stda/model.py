"""Network blocks and full models.

The denoiser is a lightweight autoencoder over stacked triplets of
range-Doppler maps: reparameterization-style mobile encoder/decoder
blocks (parallel 1x1 / 3x3 / identity batch-norm branches, then a
strided stage with a long residual), each followed by efficient channel
attention, with two additive skip connections between mirror stages.
Two reference baselines are included: a three-layer MLP on the flattened
frame-t map and a conventional convolutional autoencoder.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import torch
from torch import nn


def concat_frames(x_t: torch.Tensor, x_t1: torch.Tensor, x_t2: torch.Tensor) -> torch.Tensor:
    """Stack three equally-shaped maps along the channel dimension (t, t-1, t-2)."""
    if not (x_t.shape == x_t1.shape == x_t2.shape):
        raise ValueError(
            f"frame shapes differ: {tuple(x_t.shape)}, {tuple(x_t1.shape)}, {tuple(x_t2.shape)}"
        )
    return torch.cat((x_t, x_t1, x_t2), dim=-3)


class MobileEncoderBlock(nn.Module):
    """Two-stage downsampling block, c -> 2c channels, h,w -> h/2,w/2.

    Stage 1 sums three parallel branches (1x1 conv + BN, 3x3 conv + BN,
    plain BN) and rectifies; stage 2 is a stride-2 3x3 conv + BN + ReLU
    plus a stride-2 3x3 long residual straight from the block input.
    """

    def __init__(self, channels: int):
        super().__init__()
        c = channels
        self.branch_1x1 = nn.Sequential(nn.Conv2d(c, c, 1), nn.BatchNorm2d(c))
        self.branch_3x3 = nn.Sequential(nn.Conv2d(c, c, 3, padding=1), nn.BatchNorm2d(c))
        self.branch_id = nn.BatchNorm2d(c)
        self.relu = nn.ReLU(inplace=False)
        self.down = nn.Sequential(nn.Conv2d(c, 2 * c, 3, stride=2, padding=1),
                                  nn.BatchNorm2d(2 * c))
        self.residual = nn.Conv2d(c, 2 * c, 3, stride=2, padding=1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.shape[-1] % 2 or x.shape[-2] % 2:
            raise ValueError(f"spatial dims must be even, got {tuple(x.shape[-2:])}")
        mixed = self.relu(self.branch_1x1(x) + self.branch_3x3(x) + self.branch_id(x))
        return self.relu(self.down(mixed)) + self.residual(x)


class MobileDecoderBlock(nn.Module):
    """Mirror of the encoder block with transposed convolutions.

    2c -> c channels, h/2,w/2 -> h,w.  The stride-2 upsampler and the
    long residual both use 4x4 transposed convolutions (the only
    shape-consistent mirror of the encoder's stride-2 stage).
    """

    def __init__(self, channels: int):
        super().__init__()
        c2 = channels
        c = channels // 2
        self.branch_1x1 = nn.Sequential(nn.ConvTranspose2d(c2, c2, 1), nn.BatchNorm2d(c2))
        self.branch_3x3 = nn.Sequential(nn.ConvTranspose2d(c2, c2, 3, padding=1),
                                        nn.BatchNorm2d(c2))
        self.branch_id = nn.BatchNorm2d(c2)
        self.relu = nn.ReLU(inplace=False)
        self.up = nn.Sequential(nn.ConvTranspose2d(c2, c, 4, stride=2, padding=1),
                                nn.BatchNorm2d(c))
        self.residual = nn.ConvTranspose2d(c2, c, 4, stride=2, padding=1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        mixed = self.relu(self.branch_1x1(x) + self.branch_3x3(x) + self.branch_id(x))
        return self.relu(self.up(mixed)) + self.residual(x)


class EcaBlock(nn.Module):
    """Efficient channel attention: GAP -> 1D conv -> sigmoid -> scale."""

    def __init__(self, kernel_size: int = 3):
        super().__init__()
        if kernel_size % 2 == 0:
            raise ValueError("ECA kernel size must be odd")
        self.conv = nn.Conv1d(1, 1, kernel_size, padding=kernel_size // 2, bias=False)

    def channel_weights(self, x: torch.Tensor) -> torch.Tensor:
        """Per-channel gate values, each in the open interval (0, 1)."""
        pooled = x.mean(dim=(-2, -1))                      # (batch, C)
        return torch.sigmoid(self.conv(pooled.unsqueeze(1)).squeeze(1))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        weights = self.channel_weights(x)
        return x * weights.unsqueeze(-1).unsqueeze(-1)


@dataclass(frozen=True)
class StdaConfig:
    """Architecture knobs; defaults give ~0.19 M parameters.

    Widths double per encoder stage and halve per decoder stage; two
    skip connections tie mirror stages together.
    """

    input_frames: int = 3
    stem_channels: int = 16
    stages: int = 2
    eca_kernel: int = 3
    map_height: int = 128
    map_width: int = 64

    def __post_init__(self):
        if self.input_frames < 1 or self.stem_channels < 1 or self.stages < 1:
            raise ValueError("config values must be positive")
        divisor = 2**self.stages
        if self.map_height % divisor or self.map_width % divisor:
            raise ValueError(f"map size must be divisible by {divisor}")

    @property
    def stage_widths(self) -> Tuple[Tuple[int, int], ...]:
        return tuple(
            (self.stem_channels * 2**i, self.stem_channels * 2 ** (i + 1))
            for i in range(self.stages)
        )


class StdaNet(nn.Module):
    """Spatio-temporal denoising autoencoder for map triplets.

    Stem conv -> (mobile encoder + ECA) per stage -> mirrored
    (mobile decoder + ECA) per stage with additive skip connections from
    the same-shape encoder outputs -> linear 3x3 head to one channel.
    A shape audit runs once at construction.
    """

    def __init__(self, config: StdaConfig = StdaConfig()):
        super().__init__()
        self.config = config
        c = config.stem_channels
        self.stem = nn.Sequential(
            nn.Conv2d(config.input_frames, c, 3, padding=1), nn.BatchNorm2d(c),
            nn.ReLU(inplace=False),
        )
        self.encoders = nn.ModuleList()
        self.encoder_attention = nn.ModuleList()
        for narrow, wide in config.stage_widths:
            self.encoders.append(MobileEncoderBlock(narrow))
            self.encoder_attention.append(EcaBlock(config.eca_kernel))
        self.decoders = nn.ModuleList()
        self.decoder_attention = nn.ModuleList()
        for narrow, wide in reversed(config.stage_widths):
            self.decoders.append(MobileDecoderBlock(wide))
            self.decoder_attention.append(EcaBlock(config.eca_kernel))
        self.head = nn.Conv2d(c, 1, 3, padding=1)
        self._audit_shapes()

    def _audit_shapes(self) -> None:
        cfg = self.config
        training = self.training
        self.eval()
        with torch.no_grad():
            x = torch.zeros(1, cfg.input_frames, cfg.map_height, cfg.map_width)
            skips = [self.stem(x)]
            h, w = cfg.map_height, cfg.map_width
            assert skips[0].shape == (1, cfg.stem_channels, h, w)
            out = skips[0]
            for stage, (narrow, wide) in enumerate(cfg.stage_widths):
                out = self.encoder_attention[stage](self.encoders[stage](out))
                h, w = h // 2, w // 2
                assert out.shape == (1, wide, h, w), (out.shape, (1, wide, h, w))
                skips.append(out)
            for stage, (narrow, wide) in enumerate(reversed(cfg.stage_widths)):
                out = self.decoder_attention[stage](self.decoders[stage](out))
                h, w = h * 2, w * 2
                assert out.shape == (1, narrow, h, w), (out.shape, (1, narrow, h, w))
                out = out + skips[-(stage + 2)]
            out = self.head(out)
            assert out.shape == (1, 1, cfg.map_height, cfg.map_width)
        self.train(training)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        cfg = self.config
        if x.shape[-3:] != (cfg.input_frames, cfg.map_height, cfg.map_width):
            raise ValueError(
                f"expected (.., {cfg.input_frames}, {cfg.map_height}, {cfg.map_width}), "
                f"got {tuple(x.shape)}"
            )
        skips = [self.stem(x)]
        out = skips[0]
        for encoder, attention in zip(self.encoders, self.encoder_attention):
            out = attention(encoder(out))
            skips.append(out)
        for stage, (decoder, attention) in enumerate(zip(self.decoders, self.decoder_attention)):
            out = attention(decoder(out)) + skips[-(stage + 2)]
        return self.head(out)


class BaselineMlp(nn.Module):
    """Three fully-connected layers on the flattened frame-t map."""

    def __init__(self, map_height: int = 128, map_width: int = 64, hidden: int = 160):
        super().__init__()
        self.map_height = map_height
        self.map_width = map_width
        flat = map_height * map_width
        self.net = nn.Sequential(
            nn.Linear(flat, hidden), nn.ReLU(inplace=False),
            nn.Linear(hidden, hidden), nn.ReLU(inplace=False),
            nn.Linear(hidden, flat),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        frame_t = x[..., :1, :, :]
        batch_shape = frame_t.shape[:-3]
        flat = frame_t.reshape(*batch_shape, -1)
        out = self.net(flat)
        return out.reshape(*batch_shape, 1, self.map_height, self.map_width)


class BaselineCae(nn.Module):
    """Conventional conv/max-pool autoencoder on the frame-t map (1->32->64->32->1)."""

    def __init__(self):
        super().__init__()
        self.encoder = nn.Sequential(
            nn.Conv2d(1, 32, 3, padding=1), nn.ReLU(inplace=False), nn.MaxPool2d(2),
            nn.Conv2d(32, 64, 3, padding=1), nn.ReLU(inplace=False), nn.MaxPool2d(2),
        )
        self.decoder = nn.Sequential(
            nn.ConvTranspose2d(64, 32, 4, stride=2, padding=1), nn.ReLU(inplace=False),
            nn.ConvTranspose2d(32, 1, 4, stride=2, padding=1),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.decoder(self.encoder(x[..., :1, :, :]))


BASELINE_KINDS = ("mlp", "cae")


def build_baseline(kind: str, map_height: int = 128, map_width: int = 64) -> nn.Module:
    if kind == "mlp":
        return BaselineMlp(map_height, map_width)
    if kind == "cae":
        return BaselineCae()
    raise ValueError(f"unknown baseline kind {kind!r}, expected one of {BASELINE_KINDS}")


def baseline_forward(kind: str, x: torch.Tensor) -> torch.Tensor:
    """One-shot baseline inference on a (batch, c, h, w) triplet tensor."""
    model = build_baseline(kind, x.shape[-2], x.shape[-1])
    model.eval()
    with torch.no_grad():
        return model(x)


def parameter_count(module: nn.Module) -> int:
    return sum(p.numel() for p in module.parameters() if p.requires_grad)
