"""Certification requests: build the info object, self-sign it, verify it.

A request is the DER of CertificationRequestInfo (version, subject name,
subject public key info, attributes) signed with the subject's own private
key under RSASSA-PSS, so verification needs nothing but the request itself.
The salt length is clamped to what the key's modulus can accommodate, which
keeps small desk-scale keys usable.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import asn1, oids, pkcs1
from .asn1 import DerValue, der_decode, der_encode
from .keystore import (AlgorithmIdentifier, Attribute, attribute_check,
                       _attributes_from_der, _attributes_to_der)
from .pkcs1 import ModulusTooSmall, PssParams
from .primitives import RandomSource
from .rsa import RsaPrivateKey, RsaPublicKey

__all__ = [
    "MalformedRequest",
    "Name",
    "CertificationRequestInfo",
    "CertificationRequest",
    "build_csr",
    "verify_csr",
    "encode_public_key_info",
    "decode_public_key_info",
    "pss_salt_len_for",
]

_NAME_FIELDS = {
    "commonName": oids.CN,
    "organization": oids.ORGANIZATION,
    "country": oids.COUNTRY,
    "emailAddress": oids.AT_EMAIL_ADDRESS,
}
_NAME_FIELDS_BY_OID = {oid: name for name, oid in _NAME_FIELDS.items()}


class MalformedRequest(ValueError):
    pass


@dataclass(frozen=True)
class Name:
    """Ordered distinguished-name pairs; commonName is mandatory."""

    pairs: tuple[tuple[str, str], ...]

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((k, v) for k, v in self.pairs))
        fields = [k for k, _ in self.pairs]
        unknown = set(fields) - set(_NAME_FIELDS)
        if unknown:
            raise ValueError(f"unsupported name fields: {sorted(unknown)}")
        if "commonName" not in fields:
            raise ValueError("commonName is required")
        for key, value in self.pairs:
            if key == "country" and not (len(value) == 2 and value.isalpha()):
                raise ValueError("country must be a two-letter code")
            if not value:
                raise ValueError(f"{key} must be non-empty")

    def get(self, field: str) -> str | None:
        for key, value in self.pairs:
            if key == field:
                return value
        return None

    def to_der_value(self) -> DerValue:
        rdns = []
        for key, value in self.pairs:
            if key == "country":
                encoded = asn1.printable_string(value)
            elif key == "emailAddress":
                encoded = asn1.ia5_string(value)
            else:
                encoded = asn1.utf8_string(value)
            pair = asn1.sequence(asn1.oid_value(_NAME_FIELDS[key]), encoded)
            rdns.append(asn1.set_value(pair))
        return asn1.sequence(*rdns)

    @classmethod
    def from_der_value(cls, value: DerValue) -> "Name":
        pairs = []
        for rdn in asn1.require(value, asn1.SEQUENCE).children:
            (pair,) = asn1.require(rdn, asn1.SET).children
            oid_v, text_v = asn1.require(pair, asn1.SEQUENCE).children
            field = _NAME_FIELDS_BY_OID.get(oid_v.as_oid())
            if field is None:
                raise MalformedRequest(f"unsupported name component {oid_v.as_oid()}")
            pairs.append((field, text_v.as_text()))
        return cls(tuple(pairs))


# ---------------------------------------------------------------------------
# SubjectPublicKeyInfo


def encode_public_key_info(pk: RsaPublicKey) -> DerValue:
    key_der = der_encode(asn1.sequence(asn1.integer(pk.n), asn1.integer(pk.e)))
    return asn1.sequence(
        AlgorithmIdentifier(oids.RSA_ENCRYPTION, asn1.null()).to_der_value(),
        asn1.bit_string(key_der),
    )


def decode_public_key_info(value: DerValue) -> RsaPublicKey:
    alg_v, key_v = asn1.require(value, asn1.SEQUENCE).children
    algorithm = AlgorithmIdentifier.from_der_value(alg_v)
    if algorithm.oid != oids.RSA_ENCRYPTION:
        raise MalformedRequest(f"unsupported key algorithm {algorithm.oid}")
    wrapped = asn1.require(der_decode(key_v.as_bit_string()), asn1.SEQUENCE)
    n_v, e_v = wrapped.children
    return RsaPublicKey(n_v.as_integer(), e_v.as_integer())


# ---------------------------------------------------------------------------
# request objects


@dataclass(frozen=True)
class CertificationRequestInfo:
    subject: Name
    public_key: RsaPublicKey
    attributes: tuple[Attribute, ...] = ()
    version: int = 0

    def __post_init__(self):
        ordered = tuple(sorted(self.attributes,
                               key=lambda a: der_encode(a.to_der_value())))
        object.__setattr__(self, "attributes", ordered)

    def to_der_value(self) -> DerValue:
        return asn1.sequence(
            asn1.integer(self.version),
            self.subject.to_der_value(),
            encode_public_key_info(self.public_key),
            _attributes_to_der(self.attributes),
        )

    @classmethod
    def from_der_value(cls, value: DerValue) -> "CertificationRequestInfo":
        version_v, subject_v, spki_v, attrs_v = asn1.require(value, asn1.SEQUENCE).children
        if not attrs_v.is_context(0):
            raise MalformedRequest("attribute set must be [0] tagged")
        return cls(Name.from_der_value(subject_v), decode_public_key_info(spki_v),
                   _attributes_from_der(attrs_v), version_v.as_integer())


@dataclass(frozen=True)
class CertificationRequest:
    """Signed request.  ``info_der`` is the exact octet string the signature
    covers; it is kept verbatim so that verification never runs over a
    re-normalized encoding of a tampered request."""

    info: CertificationRequestInfo
    signature_algorithm: AlgorithmIdentifier
    signature: bytes
    info_der: bytes

    def to_der(self) -> bytes:
        return der_encode(asn1.sequence(
            der_decode(self.info_der),
            self.signature_algorithm.to_der_value(),
            asn1.bit_string(self.signature),
        ))

    @classmethod
    def from_der(cls, octets: bytes) -> "CertificationRequest":
        try:
            info_v, alg_v, sig_v = der_decode(octets).children
            return cls(CertificationRequestInfo.from_der_value(info_v),
                       AlgorithmIdentifier.from_der_value(alg_v),
                       sig_v.as_bit_string(),
                       der_encode(info_v))
        except (asn1.DerError, ValueError) as exc:
            raise MalformedRequest(str(exc)) from None


def pss_salt_len_for(key: RsaPublicKey | RsaPrivateKey) -> int:
    """Largest salt up to the hash length that the modulus leaves room for."""
    k0 = pkcs1.SHA256.output_len
    room = key.modulus_octets - k0 - 2
    if room < 0:
        raise ModulusTooSmall("modulus cannot carry a PSS encoding at all")
    return min(k0, room)


def build_csr(subject: Name, keypair: tuple[RsaPublicKey, RsaPrivateKey],
              attributes: tuple[Attribute, ...], rng: RandomSource) -> CertificationRequest:
    """Construct the info object, then self-sign its DER with the subject key."""
    public, private = keypair
    if public != private.public_key:
        raise ValueError("public key does not match the private key")
    for attribute in attributes:
        if not attribute_check(attribute):
            raise ValueError(f"attribute {attribute.attr_type} fails its syntax check")
    info = CertificationRequestInfo(subject, public, tuple(attributes))
    info_der = der_encode(info.to_der_value())
    params = PssParams.for_key(private, salt_len=pss_salt_len_for(private))
    signature = pkcs1.sign(info_der, private, rng, params)
    return CertificationRequest(info, AlgorithmIdentifier(oids.RSASSA_PSS),
                                signature, info_der)


def verify_csr(csr: CertificationRequest) -> bool:
    """Self-signature check under the public key embedded in the request."""
    if csr.signature_algorithm.oid != oids.RSASSA_PSS:
        return False
    return pkcs1.verify(csr.info_der, csr.signature, csr.info.public_key)
