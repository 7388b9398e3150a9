"""Private-key containers and the attribute machinery shared by the other
container modules.

Two DER objects are produced here: PrivateKeyInfo (version, key algorithm,
key octets, optional attribute set) and EncryptedPrivateKeyInfo (PBES2
algorithm header plus ciphertext).  The RSA key body inside PrivateKeyInfo is
a SEQUENCE of version, n, e, d, followed by one (r_i, d_i, t_i) triple per
prime; the first prime carries the trivial coefficient t_1 = 1 so that all
primes share one shape.  Multiprime keys use body version 1, two-prime keys
version 0.

The attribute registry holds exactly the ten types the other standards pull
in: contentType, messageDigest, signingTime, sequenceNumber, randomNonce,
counterSignature, challengePassword, extensionRequest, friendlyName, and
localKeyId.  naturalPerson/pkcsEntity groupings are plain attribute bundles
with no directory-schema machinery behind them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

from . import asn1, oids
from .asn1 import DerValue, Oid, der_decode, der_encode
from .errors import DecryptionError, UnsupportedAlgorithm
from .pkcs5 import Pbes2Params, pbes2_decrypt, pbes2_encrypt
from .primitives import RandomSource
from .rsa import RsaPrivateKey

__all__ = [
    "MalformedKey",
    "UnknownAttributeType",
    "SyntaxViolation",
    "AlgorithmIdentifier",
    "Attribute",
    "attribute_make",
    "attribute_check",
    "ATTRIBUTE_REGISTRY",
    "PrivateKeyInfo",
    "EncryptedPrivateKeyInfo",
    "encode_private_key",
    "decode_private_key",
    "decode_private_key_info",
    "encrypt_private_key",
    "decrypt_private_key",
    "pbes2_algorithm",
    "pbes2_params_from_algorithm",
    "natural_person_bundle",
    "pkcs_entity_bundle",
]


class MalformedKey(ValueError):
    pass


class UnknownAttributeType(KeyError):
    pass


class SyntaxViolation(ValueError):
    pass


# ---------------------------------------------------------------------------
# AlgorithmIdentifier


@dataclass(frozen=True)
class AlgorithmIdentifier:
    oid: Oid
    params: DerValue | None = None

    def to_der_value(self) -> DerValue:
        children = [asn1.oid_value(self.oid)]
        if self.params is not None:
            children.append(self.params)
        return asn1.sequence(*children)

    @classmethod
    def from_der_value(cls, value: DerValue) -> "AlgorithmIdentifier":
        kids = asn1.require(value, asn1.SEQUENCE).children
        if not 1 <= len(kids) <= 2:
            raise asn1.NonCanonical("AlgorithmIdentifier must have one or two fields")
        return cls(kids[0].as_oid(), kids[1] if len(kids) == 2 else None)


_RSA_ALG = AlgorithmIdentifier(oids.RSA_ENCRYPTION, asn1.null())


def pbes2_algorithm(params: Pbes2Params) -> AlgorithmIdentifier:
    """PBES2 AlgorithmIdentifier carrying (salt, count, PRF id, cipher id, IV)."""
    kdf = AlgorithmIdentifier(
        oids.PBKDF2,
        asn1.sequence(
            asn1.octet_string(params.salt),
            asn1.integer(params.iterations),
            AlgorithmIdentifier(oids.HMAC_WITH_SHA256).to_der_value(),
        ),
    )
    enc = AlgorithmIdentifier(oids.AES128_CBC, asn1.octet_string(params.iv))
    return AlgorithmIdentifier(
        oids.PBES2, asn1.sequence(kdf.to_der_value(), enc.to_der_value())
    )


def pbes2_params_from_algorithm(alg: AlgorithmIdentifier) -> Pbes2Params:
    if alg.oid in oids.LEGACY_PBE:
        raise UnsupportedAlgorithm(f"legacy password-based scheme {alg.oid} not supported")
    if alg.oid != oids.PBES2:
        raise UnsupportedAlgorithm(f"unsupported encryption algorithm {alg.oid}")
    if alg.params is None:
        raise MalformedKey("PBES2 header lacks parameters")
    kdf_value, enc_value = alg.params.children
    kdf = AlgorithmIdentifier.from_der_value(kdf_value)
    enc = AlgorithmIdentifier.from_der_value(enc_value)
    if kdf.oid != oids.PBKDF2:
        raise UnsupportedAlgorithm(f"unsupported key derivation {kdf.oid}")
    if enc.oid != oids.AES128_CBC:
        raise UnsupportedAlgorithm(f"unsupported cipher {enc.oid}")
    salt_v, iter_v, prf_v = kdf.params.children
    prf = AlgorithmIdentifier.from_der_value(prf_v)
    if prf.oid != oids.HMAC_WITH_SHA256:
        raise UnsupportedAlgorithm(f"unsupported PRF {prf.oid}")
    return Pbes2Params(salt_v.as_octet_string(), iter_v.as_integer(),
                       enc.params.as_octet_string())


# ---------------------------------------------------------------------------
# attributes


@dataclass(frozen=True)
class Attribute:
    """attrType plus a set of values, held in canonical (encoded) order."""

    attr_type: Oid
    values: tuple[DerValue, ...]

    def __post_init__(self):
        ordered = tuple(sorted(self.values, key=der_encode))
        if not ordered:
            raise ValueError("attribute needs at least one value")
        object.__setattr__(self, "values", ordered)

    def to_der_value(self) -> DerValue:
        return asn1.sequence(asn1.oid_value(self.attr_type), asn1.set_value(*self.values))

    @classmethod
    def from_der_value(cls, value: DerValue) -> "Attribute":
        type_v, set_v = asn1.require(value, asn1.SEQUENCE).children
        asn1.require(set_v, asn1.SET)
        return cls(type_v.as_oid(), set_v.children)


def _is_primitive(value: DerValue, tag: int) -> bool:
    return not value.constructed and value.is_universal(tag)


def _check_time(value: DerValue) -> bool:
    if _is_primitive(value, asn1.UTC_TIME):
        return re.fullmatch(rb"\d{12}Z", value.octets) is not None
    if _is_primitive(value, asn1.GENERALIZED_TIME):
        return re.fullmatch(rb"\d{14}Z", value.octets) is not None
    return False


def _check_directory_string(value: DerValue) -> bool:
    return (_is_primitive(value, asn1.PRINTABLE_STRING)
            or _is_primitive(value, asn1.UTF8_STRING)) and len(value.octets) > 0


@dataclass(frozen=True)
class AttributeSpec:
    name: str
    oid: Oid
    syntax: Callable[[DerValue], bool] = field(compare=False)
    make: Callable[[object], DerValue] = field(compare=False)


def _make_time(value) -> DerValue:
    if isinstance(value, DerValue):
        return value
    text = str(value)
    if re.fullmatch(r"\d{12}Z", text):
        return asn1.utc_time(text)
    if re.fullmatch(r"\d{14}Z", text):
        return asn1.generalized_time(text)
    raise SyntaxViolation("time must look like YYMMDDHHMMSSZ or YYYYMMDDHHMMSSZ")


def _make_directory_string(value) -> DerValue:
    if isinstance(value, DerValue):
        return value
    try:
        return asn1.printable_string(value)
    except ValueError:
        return asn1.utf8_string(value)


def _make_octets(value) -> DerValue:
    return value if isinstance(value, DerValue) else asn1.octet_string(value)


def _make_passthrough(value) -> DerValue:
    if not isinstance(value, DerValue):
        raise SyntaxViolation("expected an already-built value")
    return value


_SPECS = [
    AttributeSpec("contentType", oids.AT_CONTENT_TYPE,
                  lambda v: _is_primitive(v, asn1.OBJECT_IDENTIFIER),
                  lambda v: v if isinstance(v, DerValue) else asn1.oid_value(v)),
    AttributeSpec("messageDigest", oids.AT_MESSAGE_DIGEST,
                  lambda v: _is_primitive(v, asn1.OCTET_STRING), _make_octets),
    AttributeSpec("signingTime", oids.AT_SIGNING_TIME, _check_time, _make_time),
    AttributeSpec("sequenceNumber", oids.AT_SEQUENCE_NUMBER,
                  lambda v: _is_primitive(v, asn1.INTEGER) and v.as_integer() >= 1,
                  lambda v: v if isinstance(v, DerValue) else asn1.integer(int(v))),
    AttributeSpec("randomNonce", oids.AT_RANDOM_NONCE,
                  lambda v: _is_primitive(v, asn1.OCTET_STRING) and len(v.octets) >= 4,
                  _make_octets),
    AttributeSpec("counterSignature", oids.AT_COUNTER_SIGNATURE,
                  lambda v: v.constructed and v.is_universal(asn1.SEQUENCE),
                  _make_passthrough),
    AttributeSpec("challengePassword", oids.AT_CHALLENGE_PASSWORD,
                  _check_directory_string, _make_directory_string),
    AttributeSpec("extensionRequest", oids.AT_EXTENSION_REQUEST,
                  lambda v: v.constructed and v.is_universal(asn1.SEQUENCE),
                  _make_passthrough),
    AttributeSpec("friendlyName", oids.AT_FRIENDLY_NAME,
                  lambda v: _is_primitive(v, asn1.UTF8_STRING) and len(v.octets) > 0,
                  lambda v: v if isinstance(v, DerValue) else asn1.utf8_string(v)),
    AttributeSpec("localKeyId", oids.AT_LOCAL_KEY_ID,
                  lambda v: _is_primitive(v, asn1.OCTET_STRING), _make_octets),
]

ATTRIBUTE_REGISTRY: dict[str, AttributeSpec] = {s.name: s for s in _SPECS}
_REGISTRY_BY_OID: dict[Oid, AttributeSpec] = {s.oid: s for s in _SPECS}


def attribute_make(type_name: str, value) -> Attribute:
    """Build a registered attribute from a Python-native or DerValue payload."""
    spec = ATTRIBUTE_REGISTRY.get(type_name)
    if spec is None:
        raise UnknownAttributeType(type_name)
    der_value = spec.make(value)
    if not spec.syntax(der_value):
        raise SyntaxViolation(f"value does not match the {type_name} syntax")
    return Attribute(spec.oid, (der_value,))


def attribute_check(attribute: Attribute) -> bool:
    """Total check: True iff the type is registered and every value conforms."""
    spec = _REGISTRY_BY_OID.get(attribute.attr_type)
    if spec is None:
        return False
    return all(spec.syntax(v) for v in attribute.values)


def _attributes_to_der(attributes: tuple[Attribute, ...], tag: int = 0) -> DerValue:
    """[tag] IMPLICIT SET OF Attribute in canonical order."""
    encoded = sorted((a.to_der_value() for a in attributes), key=der_encode)
    return asn1.context(tag, tuple(encoded))


def _attributes_from_der(value: DerValue) -> tuple[Attribute, ...]:
    encodings = [der_encode(child) for child in value.children]
    if encodings != sorted(encodings):
        raise asn1.NonCanonical("attribute set not in canonical order")
    return tuple(Attribute.from_der_value(child) for child in value.children)


# ---------------------------------------------------------------------------
# attribute bundles (directory object classes, flattened)

_NATURAL_PERSON_FIELDS: dict[str, tuple[Oid, Callable[[str], DerValue]]] = {
    "email_address": (oids.AT_EMAIL_ADDRESS, asn1.ia5_string),
    "country_of_citizenship": (oids.AT_COUNTRY_OF_CITIZENSHIP, asn1.printable_string),
    "country_of_residence": (oids.AT_COUNTRY_OF_RESIDENCE, asn1.printable_string),
    "pseudonym": (oids.AT_PSEUDONYM, asn1.utf8_string),
    "place_of_birth": (oids.AT_PLACE_OF_BIRTH, asn1.utf8_string),
    "serial_number": (oids.AT_SERIAL_NUMBER, asn1.printable_string),
    "unstructured_address": (oids.AT_UNSTRUCTURED_ADDRESS, asn1.utf8_string),
    "unstructured_name": (oids.AT_UNSTRUCTURED_NAME, asn1.utf8_string),
    "gender": (oids.AT_GENDER, asn1.printable_string),
    "date_of_birth": (oids.AT_DATE_OF_BIRTH, asn1.generalized_time),
}

_PKCS_ENTITY_FIELDS: dict[str, Oid] = {
    "pkcs7_pdu": oids.AT_PKCS7_PDU,
    "user_pkcs12": oids.AT_USER_PKCS12,
    "pkcs15_token": oids.AT_PKCS15_TOKEN,
    "encrypted_private_key_info": oids.AT_ENCRYPTED_PRIVATE_KEY_INFO,
}


def natural_person_bundle(**fields: str) -> tuple[Attribute, ...]:
    """Personal attributes as a flat bundle, one attribute per supplied field."""
    out = []
    for name, value in fields.items():
        if name not in _NATURAL_PERSON_FIELDS:
            raise UnknownAttributeType(name)
        oid, make = _NATURAL_PERSON_FIELDS[name]
        out.append(Attribute(oid, (make(value),)))
    return tuple(out)


def pkcs_entity_bundle(**fields: DerValue) -> tuple[Attribute, ...]:
    """PKCS-document attributes (CMS PDU, PFX, wrapped key) as a flat bundle."""
    out = []
    for name, value in fields.items():
        if name not in _PKCS_ENTITY_FIELDS:
            raise UnknownAttributeType(name)
        out.append(Attribute(_PKCS_ENTITY_FIELDS[name], (value,)))
    return tuple(out)


# ---------------------------------------------------------------------------
# PrivateKeyInfo


def _key_body(key: RsaPrivateKey) -> DerValue:
    coefficients = (1,) + key.crt_coefficients  # R_1 is empty, so t_1 = 1
    triples = [
        asn1.sequence(asn1.integer(r), asn1.integer(d_i), asn1.integer(t_i))
        for r, d_i, t_i in zip(key.primes, key.crt_exponents, coefficients)
    ]
    return asn1.sequence(
        asn1.integer(key.version),
        asn1.integer(key.n),
        asn1.integer(key.e),
        asn1.integer(key.d),
        asn1.sequence(*triples),
    )


def _key_from_body(body: DerValue) -> RsaPrivateKey:
    version_v, n_v, e_v, d_v, triples_v = asn1.require(body, asn1.SEQUENCE).children
    asn1.require(triples_v, asn1.SEQUENCE)
    primes, exponents, coefficients = [], [], []
    for triple in triples_v.children:
        r_v, d_i_v, t_i_v = asn1.require(triple, asn1.SEQUENCE).children
        primes.append(r_v.as_integer())
        exponents.append(d_i_v.as_integer())
        coefficients.append(t_i_v.as_integer())
    if not coefficients or coefficients[0] != 1:
        raise MalformedKey("first prime must carry the trivial coefficient 1")
    products = []
    running = 1
    for r in primes[:-1]:
        running *= r
        products.append(running)
    return RsaPrivateKey(
        version_v.as_integer(), n_v.as_integer(), e_v.as_integer(), d_v.as_integer(),
        tuple(primes), tuple(exponents), tuple(coefficients[1:]), tuple(products),
    )


@dataclass(frozen=True)
class PrivateKeyInfo:
    key: RsaPrivateKey
    attributes: tuple[Attribute, ...] = ()
    algorithm: AlgorithmIdentifier = _RSA_ALG

    def __post_init__(self):
        ordered = tuple(sorted(self.attributes,
                               key=lambda a: der_encode(a.to_der_value())))
        object.__setattr__(self, "attributes", ordered)

    def to_der(self) -> bytes:
        children = [
            asn1.integer(0),
            self.algorithm.to_der_value(),
            asn1.octet_string(der_encode(_key_body(self.key))),
        ]
        if self.attributes:
            children.append(_attributes_to_der(self.attributes))
        return der_encode(asn1.sequence(*children))

    @classmethod
    def from_der(cls, octets: bytes) -> "PrivateKeyInfo":
        try:
            root = asn1.require(der_decode(octets), asn1.SEQUENCE)
            kids = root.children
            if len(kids) not in (3, 4) or kids[0].as_integer() != 0:
                raise MalformedKey("unrecognized PrivateKeyInfo shape")
            algorithm = AlgorithmIdentifier.from_der_value(kids[1])
            if algorithm.oid != oids.RSA_ENCRYPTION:
                raise UnsupportedAlgorithm(f"unsupported key algorithm {algorithm.oid}")
            key = _key_from_body(der_decode(kids[2].as_octet_string()))
            attributes = ()
            if len(kids) == 4:
                if not kids[3].is_context(0):
                    raise MalformedKey("unexpected trailing field")
                attributes = _attributes_from_der(kids[3])
            return cls(key, attributes, algorithm)
        except (UnsupportedAlgorithm, MalformedKey):
            raise
        except (asn1.DerError, ValueError) as exc:
            raise MalformedKey(str(exc)) from None


def encode_private_key(key: RsaPrivateKey, attributes: tuple[Attribute, ...] = ()) -> bytes:
    return PrivateKeyInfo(key, attributes).to_der()


def decode_private_key_info(octets: bytes) -> PrivateKeyInfo:
    return PrivateKeyInfo.from_der(octets)


def decode_private_key(octets: bytes) -> RsaPrivateKey:
    return PrivateKeyInfo.from_der(octets).key


# ---------------------------------------------------------------------------
# EncryptedPrivateKeyInfo


@dataclass(frozen=True)
class EncryptedPrivateKeyInfo:
    algorithm: AlgorithmIdentifier
    encrypted_data: bytes

    def to_der(self) -> bytes:
        return der_encode(asn1.sequence(
            self.algorithm.to_der_value(),
            asn1.octet_string(self.encrypted_data),
        ))

    @classmethod
    def from_der(cls, octets: bytes) -> "EncryptedPrivateKeyInfo":
        try:
            alg_v, data_v = asn1.require(der_decode(octets), asn1.SEQUENCE).children
            return cls(AlgorithmIdentifier.from_der_value(alg_v), data_v.as_octet_string())
        except (asn1.DerError, ValueError) as exc:
            raise MalformedKey(str(exc)) from None


def encrypt_private_key(info: PrivateKeyInfo, password: bytes, salt: bytes,
                        iterations: int, rng: RandomSource) -> EncryptedPrivateKeyInfo:
    if not password:
        raise ValueError("password must be non-empty")
    params, ciphertext = pbes2_encrypt(info.to_der(), password, salt, iterations, rng)
    return EncryptedPrivateKeyInfo(pbes2_algorithm(params), ciphertext)


def decrypt_private_key(epki: EncryptedPrivateKeyInfo, password: bytes) -> PrivateKeyInfo:
    params = pbes2_params_from_algorithm(epki.algorithm)
    plaintext = pbes2_decrypt(params, epki.encrypted_data, password)
    try:
        return PrivateKeyInfo.from_der(plaintext)
    except (MalformedKey, UnsupportedAlgorithm):
        # a wrong password that slips past the padding check must look the same
        raise DecryptionError() from None
