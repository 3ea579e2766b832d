"""Reader for the MATLAB level-5 MAT-file binary format (numeric subset).

Covers what NinaPro DB2 distribution files need: real numeric matrices
(any integer/float storage width, any dimensionality), zlib-compressed
elements, and both byte orders.  Cell, struct, char, sparse, complex and
function arrays are surfaced as explicitly unsupported variables rather
than silently dropped.  MAT v7.3 (HDF5-based) files are out of scope.

Layout summary: a 128-byte header (116 bytes of text, 8 reserved bytes,
a uint16 version 0x0100 and a 2-byte endian indicator), followed by tagged
data elements.  Each tag is (uint32 type, uint32 byte count), except the
"small data element" packing where type and a count <= 4 share the first
word.  Matrix elements contain array-flags, dimensions, name and data
subelements, each padded to an 8-byte boundary.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, TruncatedFileError

MI_MATRIX = 14
MI_COMPRESSED = 15

# storage type code -> numpy dtype character (without byte order)
_MI_DTYPES = {
    1: "i1",
    2: "u1",
    3: "i2",
    4: "u2",
    5: "i4",
    6: "u4",
    7: "f4",
    9: "f8",
    12: "i8",
    13: "u8",
}

# array class code -> numpy dtype name for numeric classes
_MX_NUMERIC = {
    6: "float64",
    7: "float32",
    8: "int8",
    9: "uint8",
    10: "int16",
    11: "uint16",
    12: "int32",
    13: "uint32",
    14: "int64",
    15: "uint64",
}

_MX_NAMES = {
    1: "cell",
    2: "struct",
    3: "object",
    4: "char",
    5: "sparse",
    16: "function",
    17: "opaque",
}

_COMPLEX_FLAG = 0x0800


@dataclass(frozen=True)
class MatVariable:
    """One top-level MAT-file variable.

    ``data`` is the flat numeric buffer in column-major order, or None for
    unsupported array classes (``element_kind`` then names the class, e.g.
    ``"unsupported(char)"``).
    """

    name: str
    shape: tuple[int, ...]
    element_kind: str
    data: np.ndarray | None

    @property
    def is_supported(self) -> bool:
        return self.data is not None

    def to_array(self) -> np.ndarray:
        """Reshape the column-major buffer to the declared dimensions."""
        if self.data is None:
            raise FormatError(
                f"variable {self.name!r} has unsupported kind {self.element_kind}"
            )
        return self.data.reshape(self.shape, order="F")


class _Cursor:
    """Bounded sequential reader over a byte buffer."""

    def __init__(self, buf: bytes, order: str, base_offset: int = 0):
        self.buf = buf
        self.pos = 0
        self.order = order  # "<" or ">"
        self.base = base_offset  # for error reporting inside nested buffers

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise TruncatedFileError(
                f"needed {n} bytes, only {len(self.buf) - self.pos} remain",
                self.base + self.pos,
            )
        out = self.buf[self.pos : self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack(self.order + "I", self.take(4))[0]

    def align8(self):
        pad = (-self.pos) % 8
        if pad:
            self.take(pad)

    @property
    def exhausted(self) -> bool:
        return self.pos >= len(self.buf)

    def read_tag(self) -> tuple[int, bytes]:
        """Read one tagged subelement, returning (type code, payload).

        Handles both the regular 8-byte tag and the packed small-element
        form; leaves the cursor 8-byte aligned.
        """
        first = self.u32()
        small_count = first >> 16
        if small_count:
            mi_type = first & 0xFFFF
            if small_count > 4:
                raise FormatError(
                    f"small data element claims {small_count} bytes (max 4)"
                )
            payload = self.take(4)[:small_count]
            return mi_type, payload
        nbytes = self.u32()
        payload = self.take(nbytes)
        self.align8()
        return mi_type_checked(first), payload


def mi_type_checked(code: int) -> int:
    if code == 0 or code > 18:
        raise FormatError(f"unknown data element type code {code}")
    return code


def _numeric_payload(mi_type: int, payload: bytes, order: str) -> np.ndarray:
    dtype_char = _MI_DTYPES.get(mi_type)
    if dtype_char is None:
        raise FormatError(f"expected numeric storage, got element type {mi_type}")
    dtype = np.dtype(order + dtype_char)
    if len(payload) % dtype.itemsize:
        raise FormatError(
            f"{len(payload)} data bytes is not a multiple of item size {dtype.itemsize}"
        )
    return np.frombuffer(payload, dtype=dtype)


def _parse_matrix(payload: bytes, order: str, base_offset: int) -> MatVariable:
    cur = _Cursor(payload, order, base_offset)

    mi_type, flags_payload = cur.read_tag()
    if mi_type != 6 or len(flags_payload) != 8:  # miUINT32 x 2
        raise FormatError("matrix element does not start with an array-flags block")
    flags_word = struct.unpack(order + "II", flags_payload)[0]
    array_class = flags_word & 0xFF
    is_complex = bool(flags_word & _COMPLEX_FLAG)

    mi_type, dims_payload = cur.read_tag()
    if mi_type != 5:  # miINT32
        raise FormatError(f"expected dimensions (miINT32), got type {mi_type}")
    shape = tuple(int(d) for d in np.frombuffer(dims_payload, dtype=np.dtype(order + "i4")))

    mi_type, name_payload = cur.read_tag()
    if mi_type != 1:  # miINT8
        raise FormatError(f"expected array name (miINT8), got type {mi_type}")
    name = name_payload.decode("ascii")

    kind = _MX_NUMERIC.get(array_class)
    if kind is None:
        class_name = _MX_NAMES.get(array_class, f"class {array_class}")
        return MatVariable(name, shape, f"unsupported({class_name})", None)
    if is_complex:
        return MatVariable(name, shape, f"unsupported(complex {kind})", None)

    n_expected = int(np.prod(shape)) if shape else 0
    if n_expected == 0:
        return MatVariable(name, shape, kind, np.empty(0, dtype=kind))

    mi_type, real_payload = cur.read_tag()
    values = _numeric_payload(mi_type, real_payload, order)
    if values.shape[0] != n_expected:
        raise FormatError(
            f"variable {name!r}: {values.shape[0]} stored values for shape {shape}"
        )
    # Data may be stored in a narrower type than the declared array class.
    return MatVariable(name, shape, kind, values.astype(kind))


def parse_mat(data: bytes) -> dict[str, MatVariable]:
    """Parse a level-5 MAT-file byte stream into its top-level variables.

    Supports uncompressed and zlib-compressed (miCOMPRESSED) elements and
    both endiannesses.  Column-major data layout and the declared array
    class are preserved in the returned :class:`MatVariable` values.

    Raises
    ------
    FormatError
        Wrong magic/version, or malformed element structure.
    TruncatedFileError
        The stream ends inside an element; carries the byte offset.
    """
    if len(data) < 128:
        raise TruncatedFileError("file shorter than the 128-byte header", len(data))
    endian_tag = data[126:128]
    if endian_tag == b"IM":
        order = "<"
    elif endian_tag == b"MI":
        order = ">"
    else:
        raise FormatError(f"bad endian indicator {endian_tag!r}; not a MAT v5 file")
    (version,) = struct.unpack(order + "H", data[124:126])
    if version != 0x0100:
        raise FormatError(f"unsupported MAT-file version 0x{version:04x}")

    variables: dict[str, MatVariable] = {}
    pos = 128
    while pos + 8 <= len(data):
        first, nbytes = struct.unpack(order + "II", data[pos : pos + 8])
        if first >> 16:
            raise FormatError(f"unexpected small element at top level (offset {pos})")
        mi_type = mi_type_checked(first)
        start = pos + 8
        if start + nbytes > len(data):
            raise TruncatedFileError(
                f"element of {nbytes} bytes overruns the file", start
            )
        payload = data[start : start + nbytes]
        if mi_type == MI_COMPRESSED:
            try:
                inner = zlib.decompress(payload)
            except zlib.error as exc:
                raise FormatError(f"bad compressed element at offset {pos}: {exc}") from exc
            inner_cur = _Cursor(inner, order, base_offset=start)
            inner_type, inner_payload = inner_cur.read_tag()
            if inner_type != MI_MATRIX:
                raise FormatError(
                    f"compressed element contains type {inner_type}, expected matrix"
                )
            var = _parse_matrix(inner_payload, order, start)
            variables[var.name] = var
        elif mi_type == MI_MATRIX:
            var = _parse_matrix(payload, order, start)
            variables[var.name] = var
        else:
            raise FormatError(
                f"unexpected top-level element type {mi_type} at offset {pos}"
            )
        # Top-level elements are written padded; compressed byte counts are
        # exact and the next tag follows immediately.
        pos = start + nbytes
        if mi_type != MI_COMPRESSED:
            pos += (-nbytes) % 8
    return variables


def parse_mat_file(path) -> dict[str, MatVariable]:
    """Read and parse a MAT-file from disk."""
    with open(path, "rb") as fh:
        return parse_mat(fh.read())
