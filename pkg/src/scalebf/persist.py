"""Binary filter images.

Layout, all integers little-endian::

    magic        8s   b"SCALEBF1"
    version      u16
    slots        u64
    X, Y, Z      u32 x3
    tau          u16
    master_seed  u64
    per slot:    chain length u32
        per group: seed u64 x3, inserted_count u64,
                   three cell arrays of X*Y*Z u64 words (row-major)
    crc64        u64  CRC-64/XZ over every preceding byte

Images are rewritten whole; :func:`save` writes a temp file in the target
directory and renames it over the old image.
"""
from __future__ import annotations

import io
import os
import struct
import sys
import tempfile
from array import array
from pathlib import Path
from typing import BinaryIO

import crcmod

from .errors import ConfigError, ImageError
from .filter3d import CELL_BITS, Dim3
from .group import FilterGroup
from .scale import FilterConfig, ScaleBF

MAGIC = b"SCALEBF1"
FORMAT_VERSION = 1

HEADER = struct.Struct("<8sHQIIIHQ")
CHAIN = struct.Struct("<I")
GROUP = struct.Struct("<QQQQ")
TRAILER = struct.Struct("<Q")

_BIG_ENDIAN = sys.byteorder == "big"

crc64 = crcmod.mkCrcFun(0x142F0E1EBA9EA3693, initCrc=0, rev=True,
                        xorOut=0xFFFFFFFFFFFFFFFF)


class _CrcWriter:
    def __init__(self, f: BinaryIO) -> None:
        self.f = f
        self.crc = 0

    def write(self, data) -> None:
        self.crc = crc64(data, self.crc)
        self.f.write(data)


class _CrcReader:
    def __init__(self, f: BinaryIO) -> None:
        self.f = f
        self.crc = 0

    def read(self, n: int) -> bytes:
        data = self.f.read(n)
        if len(data) != n:
            raise ImageError("image is truncated")
        self.crc = crc64(data, self.crc)
        return data

    def readinto(self, buf: memoryview) -> None:
        if self.f.readinto(buf) != len(buf):
            raise ImageError("image is truncated")
        self.crc = crc64(buf, self.crc)


def write_image(sbf: ScaleBF, f: BinaryIO) -> None:
    cfg = sbf.config
    d = cfg.dims
    w = _CrcWriter(f)
    w.write(HEADER.pack(MAGIC, FORMAT_VERSION, cfg.slots, d.X, d.Y, d.Z,
                        cfg.tau, cfg.master_seed))
    for chain in sbf.chains:
        w.write(CHAIN.pack(len(chain)))
        for group in chain:
            w.write(GROUP.pack(*group.seeds, group.inserted_count))
            for flt in group.filters:
                cells = flt.cells
                if _BIG_ENDIAN:
                    cells = array("Q", cells)
                    cells.byteswap()
                w.write(memoryview(cells).cast("B"))
    f.write(TRAILER.pack(w.crc))


def verify_checksum(f: BinaryIO, chunk: int = 1 << 22) -> None:
    """Check the trailing CRC of a seekable image, then rewind."""
    start = f.tell()
    end = f.seek(0, io.SEEK_END)
    if end - start < HEADER.size + TRAILER.size:
        raise ImageError("image is truncated")
    f.seek(start)
    crc = 0
    remaining = end - start - TRAILER.size
    while remaining:
        data = f.read(min(chunk, remaining))
        crc = crc64(data, crc)
        remaining -= len(data)
    (stored,) = TRAILER.unpack(f.read(TRAILER.size))
    if stored != crc:
        raise ImageError("checksum mismatch, image is corrupt")
    f.seek(start)


def read_image(f: BinaryIO) -> ScaleBF:
    if f.seekable():
        verify_checksum(f)
    r = _CrcReader(f)
    magic, version, slots, x, y, z, tau, seed = HEADER.unpack(r.read(HEADER.size))
    if magic != MAGIC:
        raise ImageError(f"bad magic {magic!r}, not a filter image")
    if version != FORMAT_VERSION:
        raise ImageError(f"unsupported format version {version}")
    try:
        cfg = FilterConfig(slots, Dim3(x, y, z), tau, seed)
    except ConfigError as exc:
        raise ImageError(f"invalid configuration in image: {exc}") from None

    sbf = ScaleBF(cfg)
    capacity = cfg.group_capacity
    for slot in range(slots):
        (length,) = CHAIN.unpack(r.read(CHAIN.size))
        chain = sbf.chains[slot]
        for ordinal in range(length):
            *seeds, inserted = GROUP.unpack(r.read(GROUP.size))
            if tuple(seeds) != cfg.group_seeds(slot, ordinal):
                raise ImageError(f"slot {slot} group {ordinal}: seeds do not match the master seed")
            if inserted > capacity:
                raise ImageError(f"slot {slot} group {ordinal}: over capacity")
            if ordinal < length - 1 and inserted < capacity:
                raise ImageError(f"slot {slot} group {ordinal}: non-terminal group is not full")
            group = FilterGroup(cfg.dims, cfg.tau, seeds)
            group.inserted_count = inserted
            for flt in group.filters:
                r.readinto(memoryview(flt.cells).cast("B"))
                if _BIG_ENDIAN:
                    flt.cells.byteswap()
                flt.inserted_count = inserted
                flt.set_bit_count = flt.popcount()
            chain.append(group)
            sbf.total_groups += 1
            sbf.total_keys += inserted
    trailer = f.read(TRAILER.size)
    if len(trailer) != TRAILER.size:
        raise ImageError("image is truncated")
    (stored,) = TRAILER.unpack(trailer)
    if stored != r.crc:
        raise ImageError("checksum mismatch, image is corrupt")
    if f.read(1):
        raise ImageError("trailing bytes after checksum")
    # checked after the CRC so corruption is reported as such first
    for slot, ordinal, group in sbf.groups():
        for flt in group.filters:
            if flt.set_bit_count > flt.inserted_count or (flt.words() >> CELL_BITS).any():
                raise ImageError(f"slot {slot} group {ordinal}: inconsistent cell contents")
    return sbf


def dumps(sbf: ScaleBF) -> bytes:
    buf = io.BytesIO()
    write_image(sbf, buf)
    return buf.getvalue()


def loads(data: bytes) -> ScaleBF:
    return read_image(io.BytesIO(data))


def save(sbf: ScaleBF, path: str | os.PathLike) -> None:
    """Write ``sbf`` to ``path`` atomically (temp file, fsync, rename)."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "wb") as f:
            write_image(sbf, f)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def load(path: str | os.PathLike) -> ScaleBF:
    with open(path, "rb", buffering=1 << 20) as f:
        return read_image(f)
