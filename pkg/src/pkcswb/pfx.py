"""Personal information exchange: the PFX PDU and its four protection modes.

A PFX is (version, authSafe, optional macData) where authSafe is a
ContentInfo.  Bags are serialized into a SafeContents sequence, wrapped in an
AuthenticatedSafe (a sequence of per-mode ContentInfo elements), and guarded
by one privacy mode (password -> PBES2, public key -> enveloped-data to the
destination platform) and one integrity mode (password -> PBMAC1 over the
authSafe DER, public key -> signed-data by the source platform).

Opening a PFX always verifies integrity before attempting any privacy
decryption; the optional ``trace`` argument records that order for tests.

The MAC derivation here is PBKDF2/PBMAC1, not the key-derivation scheme
deployed PKCS#12 files use, so these files are written with a distinct
``.pfxw`` extension and make no interoperability claim.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from . import asn1, cms, oids
from .asn1 import DerValue, der_decode, der_encode
from .cms import ContentInfo, SignerIdent
from .csr import Name
from .errors import DecryptionError, IntegrityFailure, MissingCredential
from .keystore import (AlgorithmIdentifier, Attribute, EncryptedPrivateKeyInfo,
                       PrivateKeyInfo, pbes2_algorithm, pbes2_params_from_algorithm)
from .pkcs5 import pbes2_decrypt, pbes2_encrypt, pbmac1_tag, pbmac1_verify
from .primitives import RandomSource
from .rsa import RsaPrivateKey, RsaPublicKey

__all__ = [
    "PfxSecurityWarning",
    "SafeBag",
    "MacData",
    "PfxPdu",
    "PfxCredentials",
    "pfx_create",
    "pfx_open",
    "PRIVACY_PASSWORD",
    "PRIVACY_PUBLIC_KEY",
    "INTEGRITY_PASSWORD",
    "INTEGRITY_PUBLIC_KEY",
]

PRIVACY_PASSWORD = "password"
PRIVACY_PUBLIC_KEY = "public_key"
INTEGRITY_PASSWORD = "password"
INTEGRITY_PUBLIC_KEY = "public_key"

_MAC_ITERATIONS = 2048
_PRIVACY_ITERATIONS = 2048
_SALT_LEN = 8

_BAG_OIDS = {
    "key": oids.KEY_BAG,
    "shroudedKey": oids.SHROUDED_KEY_BAG,
    "cert": oids.CERT_BAG,
}
_BAG_TYPES = {oid: name for name, oid in _BAG_OIDS.items()}


class PfxSecurityWarning(UserWarning):
    """Raised for permitted-but-unwise mode combinations."""


@dataclass(frozen=True)
class SafeBag:
    """One item of personal identity information plus its attributes."""

    bag_type: str
    value: PrivateKeyInfo | EncryptedPrivateKeyInfo | ContentInfo
    attributes: tuple[Attribute, ...] = ()

    def __post_init__(self):
        if self.bag_type not in _BAG_OIDS:
            raise ValueError(f"unknown bag type {self.bag_type!r}")
        expected = {"key": PrivateKeyInfo, "shroudedKey": EncryptedPrivateKeyInfo,
                    "cert": ContentInfo}[self.bag_type]
        if not isinstance(self.value, expected):
            raise ValueError(f"{self.bag_type} bag must hold {expected.__name__}")
        ordered = tuple(sorted(self.attributes,
                               key=lambda a: der_encode(a.to_der_value())))
        object.__setattr__(self, "attributes", ordered)

    def to_der_value(self) -> DerValue:
        if self.bag_type == "cert":
            inner = self.value.to_der_value()
        else:
            inner = der_decode(self.value.to_der())
        children = [asn1.oid_value(_BAG_OIDS[self.bag_type]), asn1.explicit(0, inner)]
        if self.attributes:
            children.append(asn1.set_value(*(a.to_der_value() for a in self.attributes)))
        return asn1.sequence(*children)

    @classmethod
    def from_der_value(cls, value: DerValue) -> "SafeBag":
        kids = asn1.require(value, asn1.SEQUENCE).children
        if len(kids) not in (2, 3):
            raise asn1.NonCanonical("unrecognized SafeBag shape")
        bag_type = _BAG_TYPES.get(kids[0].as_oid())
        if bag_type is None:
            raise ValueError(f"unknown bag type {kids[0].as_oid()}")
        (inner,) = asn1.require(kids[1], 0, tag_class=asn1.TagClass.CONTEXT).children
        if bag_type == "key":
            bag_value = PrivateKeyInfo.from_der(der_encode(inner))
        elif bag_type == "shroudedKey":
            bag_value = EncryptedPrivateKeyInfo.from_der(der_encode(inner))
        else:
            bag_value = ContentInfo.from_der_value(inner)
        attributes = ()
        if len(kids) == 3:
            attrs_v = asn1.require(kids[2], asn1.SET)
            attributes = tuple(Attribute.from_der_value(c) for c in attrs_v.children)
        return cls(bag_type, bag_value, attributes)


@dataclass(frozen=True)
class MacData:
    tag: bytes
    salt: bytes
    iterations: int

    def to_der_value(self) -> DerValue:
        return asn1.sequence(asn1.octet_string(self.tag), asn1.octet_string(self.salt),
                             asn1.integer(self.iterations))

    @classmethod
    def from_der_value(cls, value: DerValue) -> "MacData":
        tag_v, salt_v, iter_v = asn1.require(value, asn1.SEQUENCE).children
        return cls(tag_v.as_octet_string(), salt_v.as_octet_string(), iter_v.as_integer())


@dataclass(frozen=True)
class PfxPdu:
    auth_safe: ContentInfo
    mac_data: MacData | None = None
    version: int = 3

    def to_der(self) -> bytes:
        children = [asn1.integer(self.version), self.auth_safe.to_der_value()]
        if self.mac_data is not None:
            children.append(self.mac_data.to_der_value())
        return der_encode(asn1.sequence(*children))

    @classmethod
    def from_der(cls, octets: bytes) -> "PfxPdu":
        kids = asn1.require(der_decode(octets), asn1.SEQUENCE).children
        if len(kids) not in (2, 3):
            raise asn1.NonCanonical("unrecognized PFX shape")
        mac = MacData.from_der_value(kids[2]) if len(kids) == 3 else None
        return cls(ContentInfo.from_der_value(kids[1]), mac, kids[0].as_integer())


@dataclass(frozen=True)
class PfxCredentials:
    """Whatever the chosen modes require; unused fields stay None."""

    privacy_password: bytes | None = None
    integrity_password: bytes | None = None
    destination_pub: RsaPublicKey | None = None
    destination_priv: RsaPrivateKey | None = None
    source_sign_key: RsaPrivateKey | None = None
    source_verify_key: RsaPublicKey | None = None
    source_name: Name | None = None


def _safe_contents_der(bags: tuple[SafeBag, ...]) -> bytes:
    return der_encode(asn1.sequence(*(bag.to_der_value() for bag in bags)))


def _bags_from_safe_contents(octets: bytes) -> tuple[SafeBag, ...]:
    root = asn1.require(der_decode(octets), asn1.SEQUENCE)
    return tuple(SafeBag.from_der_value(child) for child in root.children)


def _privacy_wrap(contents: bytes, privacy: str, credentials: PfxCredentials,
                  rng: RandomSource) -> ContentInfo:
    if privacy == PRIVACY_PASSWORD:
        if credentials.privacy_password is None:
            raise MissingCredential("password privacy needs a privacy password")
        salt = rng.read(_SALT_LEN)
        params, ciphertext = pbes2_encrypt(contents, credentials.privacy_password,
                                           salt, _PRIVACY_ITERATIONS, rng)
        body = asn1.sequence(
            asn1.integer(0),
            asn1.sequence(
                asn1.oid_value(oids.CT_DATA),
                pbes2_algorithm(params).to_der_value(),
                asn1.context(0, ciphertext, constructed=False),
            ),
        )
        return ContentInfo(oids.CT_ENCRYPTED_DATA, body)
    if privacy == PRIVACY_PUBLIC_KEY:
        if credentials.destination_pub is None:
            raise MissingCredential("public-key privacy needs the destination public key")
        return cms.envelope(cms.make_data(contents), credentials.destination_pub, rng)
    raise ValueError(f"unknown privacy mode {privacy!r}")


def _privacy_unwrap(element: ContentInfo, credentials: PfxCredentials,
                    trace: list | None) -> bytes:
    if element.content_type == oids.CT_ENCRYPTED_DATA:
        if credentials.privacy_password is None:
            raise MissingCredential("password privacy needs a privacy password")
        if trace is not None:
            trace.append(("privacy", "password"))
        try:
            _version, ecinfo = asn1.require(element.content, asn1.SEQUENCE).children
            _ctype, alg_v, ct_v = asn1.require(ecinfo, asn1.SEQUENCE).children
            params = pbes2_params_from_algorithm(AlgorithmIdentifier.from_der_value(alg_v))
            asn1.require(ct_v, 0, tag_class=asn1.TagClass.CONTEXT, constructed=False)
            return pbes2_decrypt(params, ct_v.content, credentials.privacy_password)
        except (DecryptionError, MissingCredential):
            raise
        except Exception:
            raise DecryptionError() from None
    if element.content_type == oids.CT_ENVELOPED_DATA:
        if credentials.destination_priv is None:
            raise MissingCredential("public-key privacy needs the destination private key")
        if trace is not None:
            trace.append(("privacy", "public_key"))
        return cms.data_payload(cms.open_envelope(element, credentials.destination_priv))
    raise ValueError(f"unexpected authenticated-safe element {element.content_type}")


def pfx_create(bags, privacy: str, integrity: str, credentials: PfxCredentials,
               rng: RandomSource, *, allow_plain_keys: bool = False) -> PfxPdu:
    """Pack bags under one of the four privacy x integrity combinations."""
    bags = tuple(bags)
    if (privacy == PRIVACY_PASSWORD and not allow_plain_keys
            and any(bag.bag_type == "key" for bag in bags)):
        warnings.warn(
            "transporting an unshrouded private key under password privacy; "
            "prefer a shroudedKeyBag or public-key privacy",
            PfxSecurityWarning, stacklevel=2)
    element = _privacy_wrap(_safe_contents_der(bags), privacy, credentials, rng)
    authenticated_safe = der_encode(asn1.sequence(element.to_der_value()))
    auth_safe = cms.make_data(authenticated_safe)
    if integrity == INTEGRITY_PASSWORD:
        if credentials.integrity_password is None:
            raise MissingCredential("password integrity needs an integrity password")
        salt = rng.read(_SALT_LEN)
        tag = pbmac1_tag(auth_safe.to_der(), credentials.integrity_password,
                         salt, _MAC_ITERATIONS)
        return PfxPdu(auth_safe, MacData(tag, salt, _MAC_ITERATIONS))
    if integrity == INTEGRITY_PUBLIC_KEY:
        if credentials.source_sign_key is None or credentials.source_name is None:
            raise MissingCredential("public-key integrity needs the source signing key and name")
        signed = cms.sign_data(auth_safe, credentials.source_sign_key,
                               SignerIdent(credentials.source_name, b"pfx-source"),
                               (), rng)
        return PfxPdu(signed, None)
    raise ValueError(f"unknown integrity mode {integrity!r}")


def pfx_open(pfx: PfxPdu, credentials: PfxCredentials,
             trace: list | None = None) -> tuple[SafeBag, ...]:
    """Reverse of pfx_create: verify integrity, then undo privacy protection."""
    if pfx.mac_data is not None:
        if credentials.integrity_password is None:
            raise MissingCredential("password integrity needs an integrity password")
        ok = pbmac1_verify(pfx.auth_safe.to_der(), pfx.mac_data.tag,
                           credentials.integrity_password, pfx.mac_data.salt,
                           pfx.mac_data.iterations)
        if trace is not None:
            trace.append(("integrity", "password"))
        if not ok:
            raise IntegrityFailure("PFX MAC does not verify")
        content = pfx.auth_safe
    elif pfx.auth_safe.content_type == oids.CT_SIGNED_DATA:
        if credentials.source_verify_key is None:
            raise MissingCredential("public-key integrity needs the source public key")
        try:
            content, _ = cms.verify_signed(pfx.auth_safe, credentials.source_verify_key)
        except (cms.DigestMismatch, cms.SignatureInvalid) as exc:
            if trace is not None:
                trace.append(("integrity", "public_key"))
            raise IntegrityFailure(str(exc)) from None
        if trace is not None:
            trace.append(("integrity", "public_key"))
    else:
        raise IntegrityFailure("PFX carries no integrity protection")
    elements = asn1.require(der_decode(cms.data_payload(content)), asn1.SEQUENCE).children
    contents = b""
    for element_v in elements:
        element = ContentInfo.from_der_value(element_v)
        contents += _privacy_unwrap(element, credentials, trace)
    return _bags_from_safe_contents(contents)
