"""Cryptographic message syntax: one protection envelope, six content types.

Everything is a ContentInfo (content type OID plus type-specific content) and
any producer accepts any ContentInfo as its payload, so envelopes nest
arbitrarily: data inside signed-data inside enveloped-data and so on.

Integrity-side failures are reported distinctly (DigestMismatch vs
SignatureInvalid) because a verifier is not a decryption oracle; the
decryption-side operations collapse every failure into the shared uniform
DecryptionError.  Wherever a digest or signature is checked, the octets
hashed are the ones received on the wire, never a re-normalized encoding.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import asn1, oids, pkcs1
from .asn1 import DerValue, Oid, der_decode, der_encode
from .csr import (CertificationRequest, Name, decode_public_key_info,
                  encode_public_key_info, pss_salt_len_for, verify_csr)
from .errors import DecryptionError
from .keystore import (AlgorithmIdentifier, Attribute, _attributes_from_der,
                       attribute_make)
from .pkcs1 import ModulusTooSmall, PssParams
from .primitives import SHA256, HashAlg, RandomSource, cbc_decrypt, cbc_encrypt, \
    ct_equal, hmac_digest
from .rsa import RsaPrivateKey, RsaPublicKey

__all__ = [
    "DigestMismatch",
    "SignatureInvalid",
    "ContentInfo",
    "SignerIdent",
    "make_data",
    "data_payload",
    "sign_data",
    "verify_signed",
    "envelope",
    "open_envelope",
    "digest_data",
    "check_digest",
    "encrypt_data",
    "decrypt_data",
    "authenticate_data",
    "check_auth",
    "toy_issue",
    "cert_fields",
]

_CEK_LEN = 16
_IV_LEN = 16


class DigestMismatch(Exception):
    """The messageDigest attribute does not match the encapsulated content."""


class SignatureInvalid(Exception):
    """The signature (or the signed attribute set) does not verify."""


@dataclass(frozen=True)
class ContentInfo:
    """contentType plus content; the type OID fixes the content's shape."""

    content_type: Oid
    content: DerValue

    def to_der_value(self) -> DerValue:
        return asn1.sequence(asn1.oid_value(self.content_type),
                             asn1.explicit(0, self.content))

    def to_der(self) -> bytes:
        return der_encode(self.to_der_value())

    @classmethod
    def from_der_value(cls, value: DerValue) -> "ContentInfo":
        type_v, wrapper = asn1.require(value, asn1.SEQUENCE).children
        asn1.require(wrapper, 0, tag_class=asn1.TagClass.CONTEXT)
        (content,) = wrapper.children
        return cls(type_v.as_oid(), content)

    @classmethod
    def from_der(cls, octets: bytes) -> "ContentInfo":
        return cls.from_der_value(der_decode(octets))


@dataclass(frozen=True)
class SignerIdent:
    """Who signed: a distinguished name plus an opaque key identifier."""

    name: Name
    key_id: bytes

    def to_der_value(self) -> DerValue:
        return asn1.sequence(self.name.to_der_value(), asn1.octet_string(self.key_id))

    @classmethod
    def from_der_value(cls, value: DerValue) -> "SignerIdent":
        name_v, kid_v = asn1.require(value, asn1.SEQUENCE).children
        return cls(Name.from_der_value(name_v), kid_v.as_octet_string())


def _expect_type(ci: ContentInfo, content_type: Oid, what: str) -> None:
    if ci.content_type != content_type:
        raise ValueError(f"not a {what} content (got {ci.content_type})")


# ---------------------------------------------------------------------------
# data


def make_data(payload: bytes) -> ContentInfo:
    return ContentInfo(oids.CT_DATA, asn1.octet_string(payload))


def data_payload(ci: ContentInfo) -> bytes:
    _expect_type(ci, oids.CT_DATA, "data")
    return ci.content.as_octet_string()


# ---------------------------------------------------------------------------
# signed-data


def _attr_message(attr_values: tuple[DerValue, ...]) -> bytes:
    """The octets a signature over attributes covers: DER of SET OF Attribute."""
    return der_encode(asn1.set_value(*attr_values))


def _find_attr(attributes: tuple[Attribute, ...], oid: Oid) -> Attribute | None:
    for attribute in attributes:
        if attribute.attr_type == oid:
            return attribute
    return None


def sign_data(inner: ContentInfo, signer_key: RsaPrivateKey, signer_ident: SignerIdent,
              signed_attrs: tuple[Attribute, ...], rng: RandomSource) -> ContentInfo:
    """Wrap ``inner`` in signed-data.  A non-empty attribute set is augmented
    with contentType and messageDigest and the signature covers the attribute
    set; with no attributes the signature covers the encapsulated DER."""
    content_der = inner.to_der()
    digest = SHA256.digest(content_der)
    attrs = tuple(signed_attrs)
    if attrs:
        if _find_attr(attrs, oids.AT_CONTENT_TYPE) is None:
            attrs += (attribute_make("contentType", inner.content_type),)
        if _find_attr(attrs, oids.AT_MESSAGE_DIGEST) is None:
            attrs += (attribute_make("messageDigest", digest),)
        message = _attr_message(tuple(a.to_der_value() for a in attrs))
    else:
        message = content_der
    params = PssParams.for_key(signer_key, salt_len=pss_salt_len_for(signer_key))
    signature = pkcs1.sign(message, signer_key, rng, params)
    signer_info = [
        asn1.integer(1),
        signer_ident.to_der_value(),
        AlgorithmIdentifier(oids.SHA256).to_der_value(),
    ]
    if attrs:
        encoded = sorted((a.to_der_value() for a in attrs), key=der_encode)
        signer_info.append(asn1.context(0, tuple(encoded)))
    signer_info += [
        AlgorithmIdentifier(oids.RSASSA_PSS).to_der_value(),
        asn1.octet_string(signature),
    ]
    signed = asn1.sequence(
        asn1.integer(1),
        asn1.set_value(AlgorithmIdentifier(oids.SHA256).to_der_value()),
        inner.to_der_value(),
        asn1.set_value(asn1.sequence(*signer_info)),
    )
    return ContentInfo(oids.CT_SIGNED_DATA, signed)


def _parse_signed(ci: ContentInfo):
    _expect_type(ci, oids.CT_SIGNED_DATA, "signed-data")
    version_v, _algs, encap_v, signers_v = asn1.require(ci.content, asn1.SEQUENCE).children
    (signer_v,) = asn1.require(signers_v, asn1.SET).children
    kids = asn1.require(signer_v, asn1.SEQUENCE).children
    if len(kids) == 6:
        _ver, sid_v, digest_alg_v, attrs_v, sig_alg_v, sig_v = kids
        asn1.require(attrs_v, 0, tag_class=asn1.TagClass.CONTEXT)
    elif len(kids) == 5:
        _ver, sid_v, digest_alg_v, sig_alg_v, sig_v = kids
        attrs_v = None
    else:
        raise asn1.NonCanonical("unrecognized SignerInfo shape")
    return encap_v, sid_v, digest_alg_v, attrs_v, sig_alg_v, sig_v


def verify_signed(ci: ContentInfo,
                  trusted_pub: RsaPublicKey) -> tuple[ContentInfo, bool]:
    """Check digest binding then signature; returns the encapsulated content.

    Raises DigestMismatch when the messageDigest attribute disagrees with the
    received content (checked before any signature work) and SignatureInvalid
    when the signature itself fails.
    """
    encap_v, _sid, digest_alg_v, attrs_v, sig_alg_v, sig_v = _parse_signed(ci)
    if AlgorithmIdentifier.from_der_value(digest_alg_v).oid != oids.SHA256:
        raise SignatureInvalid("unsupported digest algorithm")
    if AlgorithmIdentifier.from_der_value(sig_alg_v).oid != oids.RSASSA_PSS:
        raise SignatureInvalid("unsupported signature algorithm")
    content_der = der_encode(encap_v)  # identical to the received octets
    inner = ContentInfo.from_der_value(encap_v)
    if attrs_v is not None:
        attributes = _attributes_from_der(attrs_v)
        md = _find_attr(attributes, oids.AT_MESSAGE_DIGEST)
        ct = _find_attr(attributes, oids.AT_CONTENT_TYPE)
        if md is None or ct is None:
            raise SignatureInvalid("contentType/messageDigest attributes are mandatory")
        if not ct_equal(md.values[0].as_octet_string(), SHA256.digest(content_der)):
            raise DigestMismatch("messageDigest attribute does not match the content")
        message = _attr_message(attrs_v.children)
    else:
        message = content_der
    if not pkcs1.verify(message, sig_v.as_octet_string(), trusted_pub):
        raise SignatureInvalid("signature does not verify")
    return inner, True


# ---------------------------------------------------------------------------
# enveloped-data


def _encrypted_content_value(content_type: Oid, iv: bytes, ciphertext: bytes) -> DerValue:
    return asn1.sequence(
        asn1.oid_value(content_type),
        AlgorithmIdentifier(oids.AES128_CBC, asn1.octet_string(iv)).to_der_value(),
        asn1.context(0, ciphertext, constructed=False),
    )


def _parse_encrypted_content(value: DerValue) -> tuple[Oid, bytes, bytes]:
    type_v, alg_v, ct_v = asn1.require(value, asn1.SEQUENCE).children
    algorithm = AlgorithmIdentifier.from_der_value(alg_v)
    if algorithm.oid != oids.AES128_CBC or algorithm.params is None:
        raise DecryptionError()
    asn1.require(ct_v, 0, tag_class=asn1.TagClass.CONTEXT, constructed=False)
    return type_v.as_oid(), algorithm.params.as_octet_string(), ct_v.content


def envelope(inner: ContentInfo, recipient_pub: RsaPublicKey,
             rng: RandomSource) -> ContentInfo:
    """Key transport: fresh CEK, AES-128-CBC payload, CEK wrapped with OAEP."""
    cek = rng.read(_CEK_LEN)
    iv = rng.read(_IV_LEN)
    ciphertext = cbc_encrypt(cek, iv, inner.to_der())
    try:
        encrypted_key = pkcs1.encrypt(cek, recipient_pub, pkcs1.SCHEME_OAEP, rng)
    except pkcs1.MessageTooLong:
        raise ModulusTooSmall(
            "recipient modulus cannot carry an OAEP-wrapped content key") from None
    recipient = asn1.sequence(
        asn1.integer(0),
        AlgorithmIdentifier(oids.RSAES_OAEP).to_der_value(),
        asn1.octet_string(encrypted_key),
    )
    enveloped = asn1.sequence(
        asn1.integer(0),
        recipient,
        _encrypted_content_value(inner.content_type, iv, ciphertext),
    )
    return ContentInfo(oids.CT_ENVELOPED_DATA, enveloped)


def open_envelope(ci: ContentInfo, recipient_priv: RsaPrivateKey) -> ContentInfo:
    _expect_type(ci, oids.CT_ENVELOPED_DATA, "enveloped-data")
    try:
        _version, recipient_v, econtent_v = asn1.require(ci.content, asn1.SEQUENCE).children
        _rver, kea_v, ek_v = asn1.require(recipient_v, asn1.SEQUENCE).children
        if AlgorithmIdentifier.from_der_value(kea_v).oid != oids.RSAES_OAEP:
            raise DecryptionError()
        _ctype, iv, ciphertext = _parse_encrypted_content(econtent_v)
        cek = pkcs1.decrypt(ek_v.as_octet_string(), recipient_priv, pkcs1.SCHEME_OAEP)
        plaintext = cbc_decrypt(cek, iv, ciphertext)
        return ContentInfo.from_der(plaintext)
    except DecryptionError:
        raise
    except Exception:
        raise DecryptionError() from None


# ---------------------------------------------------------------------------
# digested-data


def digest_data(inner: ContentInfo, alg: HashAlg = SHA256) -> ContentInfo:
    if alg != SHA256:
        raise ValueError("only SHA-256 digested-data is produced")
    body = asn1.sequence(
        asn1.integer(0),
        AlgorithmIdentifier(oids.SHA256).to_der_value(),
        inner.to_der_value(),
        asn1.octet_string(alg.digest(inner.to_der())),
    )
    return ContentInfo(oids.CT_DIGESTED_DATA, body)


def check_digest(ci: ContentInfo) -> bool:
    _expect_type(ci, oids.CT_DIGESTED_DATA, "digested-data")
    _version, alg_v, encap_v, digest_v = asn1.require(ci.content, asn1.SEQUENCE).children
    if AlgorithmIdentifier.from_der_value(alg_v).oid != oids.SHA256:
        return False
    return ct_equal(SHA256.digest(der_encode(encap_v)), digest_v.as_octet_string())


def digested_content(ci: ContentInfo) -> ContentInfo:
    _expect_type(ci, oids.CT_DIGESTED_DATA, "digested-data")
    return ContentInfo.from_der_value(ci.content.children[2])


# ---------------------------------------------------------------------------
# encrypted-data (pre-shared key, no key transport)


def encrypt_data(inner: ContentInfo, key: bytes, rng: RandomSource) -> ContentInfo:
    iv = rng.read(_IV_LEN)
    body = asn1.sequence(
        asn1.integer(0),
        _encrypted_content_value(inner.content_type, iv, cbc_encrypt(key, iv, inner.to_der())),
    )
    return ContentInfo(oids.CT_ENCRYPTED_DATA, body)


def decrypt_data(ci: ContentInfo, key: bytes) -> ContentInfo:
    _expect_type(ci, oids.CT_ENCRYPTED_DATA, "encrypted-data")
    try:
        _version, econtent_v = asn1.require(ci.content, asn1.SEQUENCE).children
        _ctype, iv, ciphertext = _parse_encrypted_content(econtent_v)
        return ContentInfo.from_der(cbc_decrypt(key, iv, ciphertext))
    except DecryptionError:
        raise
    except Exception:
        raise DecryptionError() from None


# ---------------------------------------------------------------------------
# authenticated-data


def authenticate_data(inner: ContentInfo, key: bytes,
                      auth_attrs: tuple[Attribute, ...] = ()) -> ContentInfo:
    """HMAC tag over the content, or over the attribute set when present
    (augmented with contentType and messageDigest, like signed-data)."""
    content_der = inner.to_der()
    attrs = tuple(auth_attrs)
    if attrs:
        if _find_attr(attrs, oids.AT_CONTENT_TYPE) is None:
            attrs += (attribute_make("contentType", inner.content_type),)
        if _find_attr(attrs, oids.AT_MESSAGE_DIGEST) is None:
            attrs += (attribute_make("messageDigest", SHA256.digest(content_der)),)
        message = _attr_message(tuple(a.to_der_value() for a in attrs))
    else:
        message = content_der
    body = [
        asn1.integer(0),
        AlgorithmIdentifier(oids.HMAC_WITH_SHA256).to_der_value(),
        inner.to_der_value(),
    ]
    if attrs:
        encoded = sorted((a.to_der_value() for a in attrs), key=der_encode)
        body.append(asn1.context(0, tuple(encoded)))
    body.append(asn1.octet_string(hmac_digest(key, message)))
    return ContentInfo(oids.CT_AUTHENTICATED_DATA, asn1.sequence(*body))


def check_auth(ci: ContentInfo, key: bytes) -> bool:
    _expect_type(ci, oids.CT_AUTHENTICATED_DATA, "authenticated-data")
    kids = asn1.require(ci.content, asn1.SEQUENCE).children
    if len(kids) == 5:
        _version, alg_v, encap_v, attrs_v, mac_v = kids
    elif len(kids) == 4:
        _version, alg_v, encap_v, mac_v = kids
        attrs_v = None
    else:
        return False
    if AlgorithmIdentifier.from_der_value(alg_v).oid != oids.HMAC_WITH_SHA256:
        return False
    content_der = der_encode(encap_v)
    if attrs_v is not None:
        try:
            attributes = _attributes_from_der(attrs_v)
        except asn1.DerError:
            return False
        md = _find_attr(attributes, oids.AT_MESSAGE_DIGEST)
        if md is None or not ct_equal(md.values[0].as_octet_string(),
                                      SHA256.digest(content_der)):
            return False
        message = _attr_message(attrs_v.children)
    else:
        message = content_der
    return ct_equal(hmac_digest(key, message), mac_v.as_octet_string())


def authenticated_content(ci: ContentInfo) -> ContentInfo:
    _expect_type(ci, oids.CT_AUTHENTICATED_DATA, "authenticated-data")
    return ContentInfo.from_der_value(ci.content.children[2])


# ---------------------------------------------------------------------------
# toy certification (the return format a certification authority uses here)


def toy_issue(request: CertificationRequest, ca_key: RsaPrivateKey, ca_name: Name,
              serial: int, rng: RandomSource) -> ContentInfo:
    """Turn a verified request into a stand-in certificate: a signed-data
    envelope over (subject, public key, serial, issuer)."""
    if not verify_csr(request):
        raise SignatureInvalid("request self-signature does not verify")
    payload = der_encode(asn1.sequence(
        request.info.subject.to_der_value(),
        encode_public_key_info(request.info.public_key),
        asn1.integer(serial),
        ca_name.to_der_value(),
    ))
    attrs = (attribute_make("sequenceNumber", serial),)
    return sign_data(make_data(payload), ca_key, SignerIdent(ca_name, b"ca"), attrs, rng)


def cert_fields(cert: ContentInfo) -> tuple[Name, RsaPublicKey, int, Name]:
    """Subject, subject key, serial, issuer of a toy certificate.  Callers
    must check the certificate with verify_signed before trusting these."""
    inner, _ = _cert_payload(cert)
    subject_v, spki_v, serial_v, issuer_v = asn1.require(inner, asn1.SEQUENCE).children
    return (Name.from_der_value(subject_v), decode_public_key_info(spki_v),
            serial_v.as_integer(), Name.from_der_value(issuer_v))


def _cert_payload(cert: ContentInfo) -> tuple[DerValue, ContentInfo]:
    encap_v, *_ = _parse_signed(cert)
    data = ContentInfo.from_der_value(encap_v)
    return der_decode(data_payload(data)), data
