"""Frame codec and on-disk bitstream format.

Binary layout (big-endian): magic ``TMRFBIT1``, 8-byte architecture hash,
u32 frame count, u32 frame size in bits, then each frame packed MSB-first.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .arch import BitAddress, FabricArch

MAGIC = b"TMRFBIT1"
_HEADER = struct.Struct(">8s8sII")


class BitstreamError(ValueError):
    pass


@dataclass
class Bitstream:
    frames: np.ndarray  # (n_frames, frame_size) uint8 of 0/1
    arch_hash: str = ""

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def frame_size(self) -> int:
        return self.frames.shape[1]

    def get(self, addr: BitAddress) -> int:
        return int(self.frames[addr.frame, addr.offset])

    def flipped(self, addr: BitAddress) -> "Bitstream":
        f = self.frames.copy()
        f[addr.frame, addr.offset] ^= 1
        return Bitstream(f, self.arch_hash)

    def __eq__(self, other) -> bool:
        return isinstance(other, Bitstream) and np.array_equal(self.frames, other.frames)


def encode_bitstream(arch: FabricArch, configuration) -> Bitstream:
    cfg = np.asarray(configuration, dtype=np.uint8)
    if cfg.shape != (arch.total_bits,):
        raise BitstreamError(f"configuration has {cfg.size} bits, fabric has {arch.total_bits}")
    if cfg.max(initial=0) > 1:
        raise BitstreamError("configuration bits must be 0 or 1")
    return Bitstream(cfg.reshape(arch.n_frames, arch.params.frame_size).copy(), arch.hash)


def decode_bitstream(arch: FabricArch, frames) -> np.ndarray:
    if isinstance(frames, Bitstream):
        if frames.arch_hash and frames.arch_hash != arch.hash:
            raise BitstreamError("bitstream was built for a different fabric")
        frames = frames.frames
    frames = np.asarray(frames, dtype=np.uint8)
    if frames.ndim != 2 or frames.shape[1] != arch.params.frame_size:
        raise BitstreamError(f"frame size mismatch: expected {arch.params.frame_size}")
    if frames.shape[0] != arch.n_frames:
        raise BitstreamError(f"frame count mismatch: {frames.shape[0]} != {arch.n_frames}")
    return frames.reshape(-1).copy()


def to_bytes(arch: FabricArch, configuration) -> bytes:
    bs = encode_bitstream(arch, configuration)
    head = _HEADER.pack(MAGIC, bytes.fromhex(arch.hash), bs.n_frames, bs.frame_size)
    return head + np.packbits(bs.frames, axis=1).tobytes()


def from_bytes(arch: FabricArch, data: bytes) -> np.ndarray:
    if len(data) < _HEADER.size:
        raise BitstreamError("truncated header")
    magic, h, nf, fs = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BitstreamError("bad magic")
    if h.hex() != arch.hash:
        raise BitstreamError("bitstream was built for a different fabric")
    body = np.frombuffer(data, dtype=np.uint8, offset=_HEADER.size)
    if body.size != nf * fs // 8:
        raise BitstreamError("payload length does not match header")
    frames = np.unpackbits(body.reshape(nf, fs // 8), axis=1)
    return decode_bitstream(arch, frames)


def write_bitstream(path, arch: FabricArch, configuration) -> None:
    Path(path).write_bytes(to_bytes(arch, configuration))


def read_bitstream(path, arch: FabricArch) -> np.ndarray:
    return from_bytes(arch, Path(path).read_bytes())


def hex_dump(arch: FabricArch, configuration) -> str:
    """One line per frame: ``frame_index: hex``; convenient for diffing."""
    bs = encode_bitstream(arch, configuration)
    packed = np.packbits(bs.frames, axis=1)
    width = len(str(bs.n_frames - 1))
    lines = [f"# arch {arch.hash} frames {bs.n_frames} size {bs.frame_size}"]
    lines += [f"{i:0{width}d}: {row.tobytes().hex()}" for i, row in enumerate(packed)]
    return "\n".join(lines) + "\n"


def parse_hex_dump(arch: FabricArch, text: str) -> np.ndarray:
    rows = []
    for line in text.splitlines():
        if not line or line.startswith("#"):
            continue
        _, hx = line.split(":", 1)
        rows.append(np.frombuffer(bytes.fromhex(hx.strip()), dtype=np.uint8))
    if not rows:
        raise BitstreamError("empty dump")
    return decode_bitstream(arch, np.unpackbits(np.stack(rows), axis=1))
