"""DER encoder/decoder for the tag/length/value subset the container modules need.

Only definite lengths are produced or accepted (DER, the canonical subset of
BER).  Values are modeled as ``DerValue`` trees: primitive values carry raw
content octets, constructed values carry an ordered tuple of child values.
Encoding is deterministic; SET values are re-ordered into canonical
(lexicographic-by-encoding) order when encoded, and canonical order is
required when decoding.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

__all__ = [
    "TagClass",
    "DerValue",
    "Oid",
    "DerError",
    "OversizeTag",
    "NonCanonical",
    "Truncated",
    "TrailingOctets",
    "IndefiniteLength",
    "NonMinimalLength",
    "ArcOverflow",
    "der_encode",
    "der_decode",
    "oid_to_octets",
    "octets_to_oid",
    "hex_dump",
]

# Universal tag numbers handled with typed constructors/accessors.  Anything
# else still round-trips as an opaque value.
BOOLEAN = 0x01
INTEGER = 0x02
BIT_STRING = 0x03
OCTET_STRING = 0x04
NULL = 0x05
OBJECT_IDENTIFIER = 0x06
UTF8_STRING = 0x0C
SEQUENCE = 0x10
SET = 0x11
PRINTABLE_STRING = 0x13
IA5_STRING = 0x16
UTC_TIME = 0x17
GENERALIZED_TIME = 0x18

# Largest tag number we encode/decode: three base-128 octets in high-tag form.
_MAX_TAG_NUMBER = 2**21 - 1

_STRING_TAGS = {UTF8_STRING, PRINTABLE_STRING, IA5_STRING, UTC_TIME, GENERALIZED_TIME}

# Universal tags that DER forbids in constructed form (and vice versa).
_ALWAYS_PRIMITIVE = {BOOLEAN, INTEGER, NULL, OBJECT_IDENTIFIER, OCTET_STRING,
                     BIT_STRING} | _STRING_TAGS
_ALWAYS_CONSTRUCTED = {SEQUENCE, SET}

_PRINTABLE_RE = re.compile(r"[A-Za-z0-9 '()+,\-./:=?]*\Z")


class DerError(ValueError):
    """Base class for DER encoding/decoding failures."""


class OversizeTag(DerError):
    """Tag number beyond the supported single/low-multi-octet range."""


class NonCanonical(DerError):
    """Value violates a DER canonical-form rule."""


class Truncated(DerError):
    """Input ended before the announced length was satisfied."""


class TrailingOctets(DerError):
    """Extra octets follow a complete top-level value."""


class IndefiniteLength(DerError):
    """BER indefinite length form; rejected, DER only."""


class NonMinimalLength(DerError):
    """Length uses more octets than necessary."""


class ArcOverflow(DerError):
    """OID arc not terminated (or absurdly large) in the encoded form."""


class TagClass(enum.IntEnum):
    UNIVERSAL = 0
    APPLICATION = 1
    CONTEXT = 2
    PRIVATE = 3


@dataclass(frozen=True)
class Oid:
    """Object identifier as a tuple of non-negative integer arcs."""

    arcs: tuple[int, ...]

    def __post_init__(self):
        arcs = tuple(self.arcs)
        object.__setattr__(self, "arcs", arcs)
        if len(arcs) < 2:
            raise ValueError("OID needs at least two arcs")
        if any(a < 0 for a in arcs):
            raise ValueError("OID arcs must be non-negative")
        if arcs[0] > 2:
            raise ValueError("first OID arc must be 0, 1 or 2")
        if arcs[0] < 2 and arcs[1] > 39:
            raise ValueError("second OID arc must be <= 39 when first arc < 2")

    @classmethod
    def parse(cls, dotted: str) -> "Oid":
        return cls(tuple(int(part) for part in dotted.split(".")))

    def dotted(self) -> str:
        return ".".join(str(a) for a in self.arcs)

    def __str__(self) -> str:
        return self.dotted()


@dataclass(frozen=True)
class DerValue:
    """One ASN.1 value: primitive (octets) or constructed (children)."""

    tag_class: TagClass
    constructed: bool
    tag_number: int
    content: bytes | tuple["DerValue", ...]

    def __post_init__(self):
        if self.tag_number < 0:
            raise ValueError("negative tag number")
        if self.constructed:
            if isinstance(self.content, (bytes, bytearray)):
                raise ValueError("constructed value must carry child values")
            children = tuple(self.content)
            if self.tag_class == TagClass.UNIVERSAL and self.tag_number == SET:
                # SETs are canonical by construction, so every round trip is
                # structure- and octet-exact
                children = tuple(sorted(children, key=der_encode))
            object.__setattr__(self, "content", children)
        else:
            if not isinstance(self.content, (bytes, bytearray)):
                raise ValueError("primitive value must carry octets")
            object.__setattr__(self, "content", bytes(self.content))

    # -- shape helpers -------------------------------------------------

    def is_universal(self, tag_number: int) -> bool:
        return self.tag_class == TagClass.UNIVERSAL and self.tag_number == tag_number

    def is_context(self, tag_number: int) -> bool:
        return self.tag_class == TagClass.CONTEXT and self.tag_number == tag_number

    @property
    def children(self) -> tuple["DerValue", ...]:
        if not self.constructed:
            raise NonCanonical("primitive value has no children")
        return self.content

    @property
    def octets(self) -> bytes:
        if self.constructed:
            raise NonCanonical("constructed value has no content octets")
        return self.content

    # -- typed accessors -----------------------------------------------

    def as_integer(self) -> int:
        self._expect_primitive(INTEGER, "INTEGER")
        return int.from_bytes(self.octets, "big", signed=True)

    def as_boolean(self) -> bool:
        self._expect_primitive(BOOLEAN, "BOOLEAN")
        return self.octets != b"\x00"

    def as_octet_string(self) -> bytes:
        self._expect_primitive(OCTET_STRING, "OCTET STRING")
        return self.octets

    def as_oid(self) -> Oid:
        self._expect_primitive(OBJECT_IDENTIFIER, "OBJECT IDENTIFIER")
        return octets_to_oid(self.octets)

    def as_text(self) -> str:
        if self.constructed or self.tag_class != TagClass.UNIVERSAL \
                or self.tag_number not in _STRING_TAGS:
            raise NonCanonical("value is not a supported string type")
        return self.octets.decode("utf-8" if self.tag_number == UTF8_STRING else "ascii")

    def as_bit_string(self) -> bytes:
        """Content of a BIT STRING with no unused bits."""
        self._expect_primitive(BIT_STRING, "BIT STRING")
        if not self.octets or self.octets[0] != 0:
            raise NonCanonical("only BIT STRING values with zero unused bits are used here")
        return self.octets[1:]

    def _expect_primitive(self, tag_number: int, what: str) -> None:
        if self.constructed or not self.is_universal(tag_number):
            raise NonCanonical(f"value is not a primitive {what}")


# ---------------------------------------------------------------------------
# constructors


def integer(value: int) -> DerValue:
    magnitude = value if value >= 0 else value + 1
    length = magnitude.bit_length() // 8 + 1
    return DerValue(TagClass.UNIVERSAL, False, INTEGER,
                    value.to_bytes(length, "big", signed=True))


def boolean(value: bool) -> DerValue:
    return DerValue(TagClass.UNIVERSAL, False, BOOLEAN, b"\xff" if value else b"\x00")


def octet_string(data: bytes) -> DerValue:
    return DerValue(TagClass.UNIVERSAL, False, OCTET_STRING, bytes(data))


def null() -> DerValue:
    return DerValue(TagClass.UNIVERSAL, False, NULL, b"")


def oid_value(oid: Oid | str) -> DerValue:
    if isinstance(oid, str):
        oid = Oid.parse(oid)
    return DerValue(TagClass.UNIVERSAL, False, OBJECT_IDENTIFIER, oid_to_octets(oid))


def bit_string(data: bytes, unused_bits: int = 0) -> DerValue:
    if not 0 <= unused_bits <= 7:
        raise ValueError("unused bit count must be 0..7")
    return DerValue(TagClass.UNIVERSAL, False, BIT_STRING, bytes([unused_bits]) + bytes(data))


def utf8_string(text: str) -> DerValue:
    return DerValue(TagClass.UNIVERSAL, False, UTF8_STRING, text.encode("utf-8"))


def printable_string(text: str) -> DerValue:
    if not _PRINTABLE_RE.match(text):
        raise ValueError("text outside the PrintableString repertoire")
    return DerValue(TagClass.UNIVERSAL, False, PRINTABLE_STRING, text.encode("ascii"))


def ia5_string(text: str) -> DerValue:
    return DerValue(TagClass.UNIVERSAL, False, IA5_STRING, text.encode("ascii"))


def utc_time(text: str) -> DerValue:
    return DerValue(TagClass.UNIVERSAL, False, UTC_TIME, text.encode("ascii"))


def generalized_time(text: str) -> DerValue:
    return DerValue(TagClass.UNIVERSAL, False, GENERALIZED_TIME, text.encode("ascii"))


def sequence(*children: DerValue) -> DerValue:
    return DerValue(TagClass.UNIVERSAL, True, SEQUENCE, tuple(children))


def set_value(*children: DerValue) -> DerValue:
    """SET (OF); the constructor puts children into DER canonical order."""
    return DerValue(TagClass.UNIVERSAL, True, SET, tuple(children))


def context(tag_number: int, children_or_octets, constructed: bool = True) -> DerValue:
    return DerValue(TagClass.CONTEXT, constructed, tag_number, children_or_octets)


def explicit(tag_number: int, inner: DerValue) -> DerValue:
    """[tag] EXPLICIT wrapper: constructed context value with one child."""
    return DerValue(TagClass.CONTEXT, True, tag_number, (inner,))


# ---------------------------------------------------------------------------
# OID content encoding


def _encode_base128(value: int) -> bytes:
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append(0x80 | (value & 0x7F))
        value >>= 7
    return bytes(reversed(out))


def oid_to_octets(oid: Oid) -> bytes:
    first = 40 * oid.arcs[0] + oid.arcs[1]
    body = _encode_base128(first)
    for arc in oid.arcs[2:]:
        body += _encode_base128(arc)
    return body


def octets_to_oid(octets: bytes) -> Oid:
    if not octets:
        raise ArcOverflow("empty OID content")
    arcs: list[int] = []
    value = 0
    started = False
    for i, b in enumerate(octets):
        if not started and b == 0x80:
            raise NonCanonical("OID arc with redundant leading octet")
        started = True
        value = (value << 7) | (b & 0x7F)
        if value > 2**63:
            raise ArcOverflow("OID arc too large")
        if not b & 0x80:
            arcs.append(value)
            value = 0
            started = False
    if started:
        raise ArcOverflow("unterminated OID arc")
    first = arcs[0]
    if first < 40:
        lead = (0, first)
    elif first < 80:
        lead = (1, first - 40)
    else:
        lead = (2, first - 80)
    return Oid(lead + tuple(arcs[1:]))


# ---------------------------------------------------------------------------
# encoding


def _encode_tag(value: DerValue) -> bytes:
    flags = (int(value.tag_class) << 6) | (0x20 if value.constructed else 0)
    if value.tag_number < 0x1F:
        return bytes([flags | value.tag_number])
    if value.tag_number > _MAX_TAG_NUMBER:
        raise OversizeTag(f"tag number {value.tag_number} not supported")
    return bytes([flags | 0x1F]) + _encode_base128(value.tag_number)


def _encode_length(length: int) -> bytes:
    if length < 0x80:
        return bytes([length])
    body = length.to_bytes((length.bit_length() + 7) // 8, "big")
    return bytes([0x80 | len(body)]) + body


def _check_primitive_canonical(value: DerValue) -> None:
    tag, content = value.tag_number, value.content
    if tag == INTEGER:
        if not content:
            raise NonCanonical("INTEGER with empty content")
        if len(content) > 1 and (
            (content[0] == 0x00 and content[1] < 0x80)
            or (content[0] == 0xFF and content[1] >= 0x80)
        ):
            raise NonCanonical("INTEGER with redundant leading octet")
    elif tag == BOOLEAN:
        if content not in (b"\x00", b"\xff"):
            raise NonCanonical("BOOLEAN content must be 0x00 or 0xff")
    elif tag == NULL:
        if content:
            raise NonCanonical("NULL must have empty content")
    elif tag == BIT_STRING:
        if not content:
            raise NonCanonical("BIT STRING needs an unused-bit-count octet")
        if content[0] > 7 or (len(content) == 1 and content[0] != 0):
            raise NonCanonical("invalid BIT STRING unused-bit count")
    elif tag == OBJECT_IDENTIFIER:
        octets_to_oid(content)  # validates arc structure


def der_encode(value: DerValue) -> bytes:
    """Encode a value tree into definite-length DER octets."""
    if value.constructed:
        if value.tag_class == TagClass.UNIVERSAL and value.tag_number in _ALWAYS_PRIMITIVE:
            raise NonCanonical(f"universal tag {value.tag_number} must be primitive")
        encoded = [der_encode(child) for child in value.content]
        if value.is_universal(SET):
            encoded.sort()
        body = b"".join(encoded)
    else:
        if value.tag_class == TagClass.UNIVERSAL:
            if value.tag_number in _ALWAYS_CONSTRUCTED:
                raise NonCanonical(f"universal tag {value.tag_number} must be constructed")
            _check_primitive_canonical(value)
        body = value.content
    return _encode_tag(value) + _encode_length(len(body)) + body


# ---------------------------------------------------------------------------
# decoding


def _decode_tag(data: bytes, pos: int) -> tuple[TagClass, bool, int, int]:
    if pos >= len(data):
        raise Truncated("input ended inside a tag")
    first = data[pos]
    pos += 1
    tag_class = TagClass(first >> 6)
    constructed = bool(first & 0x20)
    number = first & 0x1F
    if number == 0x1F:
        number = 0
        count = 0
        while True:
            if pos >= len(data):
                raise Truncated("input ended inside a high tag number")
            b = data[pos]
            pos += 1
            if count == 0 and b == 0x80:
                raise NonCanonical("high tag number with redundant leading octet")
            number = (number << 7) | (b & 0x7F)
            count += 1
            if number > _MAX_TAG_NUMBER:
                raise OversizeTag("tag number beyond supported range")
            if not b & 0x80:
                break
        if number < 0x1F:
            raise NonCanonical("high tag form used for a low tag number")
    return tag_class, constructed, number, pos


def _decode_length(data: bytes, pos: int) -> tuple[int, int]:
    if pos >= len(data):
        raise Truncated("input ended before length")
    first = data[pos]
    pos += 1
    if first < 0x80:
        return first, pos
    if first == 0x80:
        raise IndefiniteLength("indefinite length form is BER, not DER")
    count = first & 0x7F
    if pos + count > len(data):
        raise Truncated("input ended inside length octets")
    body = data[pos:pos + count]
    pos += count
    if body[0] == 0:
        raise NonMinimalLength("length has a leading zero octet")
    length = int.from_bytes(body, "big")
    if length < 0x80:
        raise NonMinimalLength("long length form used for a short length")
    return length, pos


def _decode_value(data: bytes, pos: int) -> tuple[DerValue, int]:
    tag_class, constructed, number, pos = _decode_tag(data, pos)
    length, pos = _decode_length(data, pos)
    if pos + length > len(data):
        raise Truncated("content shorter than announced length")
    body = data[pos:pos + length]
    pos += length
    if constructed:
        if tag_class == TagClass.UNIVERSAL and number in _ALWAYS_PRIMITIVE:
            raise NonCanonical(f"universal tag {number} must be primitive")
        children = []
        child_pos = 0
        while child_pos < len(body):
            child, child_pos = _decode_value(body, child_pos)
            children.append(child)
        if tag_class == TagClass.UNIVERSAL and number == SET:
            # wire order must already be canonical; check before the
            # constructor re-sorts
            encodings = [der_encode(c) for c in children]
            if encodings != sorted(encodings):
                raise NonCanonical("SET children not in canonical order")
        return DerValue(tag_class, True, number, tuple(children)), pos
    if tag_class == TagClass.UNIVERSAL:
        if number in _ALWAYS_CONSTRUCTED:
            raise NonCanonical(f"universal tag {number} must be constructed")
        probe = DerValue(tag_class, False, number, body)
        _check_primitive_canonical(probe)
        return probe, pos
    return DerValue(tag_class, False, number, body), pos


def der_decode(data: bytes) -> DerValue:
    """Decode exactly one DER value spanning the whole input."""
    value, pos = _decode_value(bytes(data), 0)
    if pos != len(data):
        raise TrailingOctets(f"{len(data) - pos} octets after the value")
    return value


def require(value: DerValue, tag_number: int, *, constructed: bool = True,
            tag_class: TagClass = TagClass.UNIVERSAL) -> DerValue:
    """Shape assertion for container parsers; returns the value unchanged."""
    if (value.tag_class != tag_class or value.constructed != constructed
            or value.tag_number != tag_number):
        raise NonCanonical(
            f"expected {'constructed' if constructed else 'primitive'} "
            f"{tag_class.name} tag {tag_number}, got {tag_class.name} "
            f"{value.tag_class.name} tag {value.tag_number}")
    return value


def hex_dump(octets: bytes) -> str:
    """Diagnostic rendering: lowercase hex, two chars per octet, no separators."""
    return bytes(octets).hex()
