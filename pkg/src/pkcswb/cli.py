"""Command-line front end for the toolkit.

Every module is reachable through a subcommand, plus ``scenario`` replays the
smart-card enrollment story end to end: key generation, personal attributes,
certification request, enveloped transport to the CA, toy issuance, PBES2
key wrapping, PFX transfer, token provisioning with a PKCS#15 directory
export, and a final challenge-response against the provisioned token.

Exit codes: 0 success, 1 cryptographic/verification failure, 2 usage or I/O
error.  Binary outputs are raw DER files; diagnostics go to stderr as plain
hex dumps.  Set --seed or PKCSWB_SEED for fully deterministic runs.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import asn1, cms, csr as csr_mod, keystore, pfx as pfx_mod, pkcs1, \
    pkcs5, rsa, token as token_mod
from .asn1 import der_decode, der_encode, hex_dump
from .errors import (DecryptionError, IntegrityFailure, MissingCredential,
                     UnsupportedAlgorithm)
from .primitives import RandomSource, SeededSource, SystemRandomSource
from .token import Token, export_pkcs15_layout

__all__ = ["main", "run_scenario", "ScenarioStepFailed", "SCENARIO_STEPS", "FAULT_POINTS"]


class ScenarioStepFailed(Exception):
    def __init__(self, step: str, reason: str):
        super().__init__(f"{step}: {reason}")
        self.step = step
        self.reason = reason


def _build_rng(args) -> RandomSource:
    seed = args.seed or os.environ.get("PKCSWB_SEED")
    if seed:
        return SeededSource(bytes.fromhex(seed.removeprefix("0x")))
    return SystemRandomSource()


def _read(path: str) -> bytes:
    with open(path, "rb") as handle:
        return handle.read()


def _write(path: str, data: bytes) -> None:
    with open(path, "wb") as handle:
        handle.write(data)
    print(f"{path} ({len(data)} octets): {hex_dump(data)}", file=sys.stderr)


def _hex_arg(text: str) -> bytes:
    return bytes.fromhex(text.removeprefix("0x"))


def _load_private(path: str) -> rsa.RsaPrivateKey:
    return keystore.decode_private_key(_read(path))


def _load_public(path: str) -> rsa.RsaPublicKey:
    return csr_mod.decode_public_key_info(der_decode(_read(path)))


# ---------------------------------------------------------------------------
# simple commands


def _cmd_keygen(args) -> int:
    rng = _build_rng(args)
    public, private = rsa.generate_key(args.bits, args.primes, args.e, rng)
    _write(args.out, keystore.encode_private_key(private))
    if args.pub:
        _write(args.pub, der_encode(csr_mod.encode_public_key_info(public)))
    return 0


def _cmd_rsa_encrypt(args) -> int:
    rng = _build_rng(args)
    ciphertext = pkcs1.encrypt(_read(args.infile), _load_public(args.key),
                               args.scheme, rng)
    _write(args.out, ciphertext)
    return 0


def _cmd_rsa_decrypt(args) -> int:
    plaintext = pkcs1.decrypt(_read(args.infile), _load_private(args.key), args.scheme)
    _write(args.out, plaintext)
    return 0


def _cmd_sign(args) -> int:
    rng = _build_rng(args)
    key = _load_private(args.key)
    params = pkcs1.PssParams.for_key(key, salt_len=csr_mod.pss_salt_len_for(key))
    _write(args.out, pkcs1.sign(_read(args.infile), key, rng, params))
    return 0


def _cmd_verify(args) -> int:
    ok = pkcs1.verify(_read(args.infile), _read(args.sig), _load_public(args.key))
    print("verified" if ok else "verification failed")
    return 0 if ok else 1


def _cmd_kdf(args) -> int:
    params = pkcs5.Pbkdf2Params(_hex_arg(args.salt), args.iterations, args.length)
    print(pkcs5.pbkdf2(args.password.encode(), params).hex())
    return 0


def _cmd_p8_wrap(args) -> int:
    rng = _build_rng(args)
    info = keystore.decode_private_key_info(_read(args.infile))
    epki = keystore.encrypt_private_key(info, args.password.encode(),
                                        rng.read(args.salt_len), args.iterations, rng)
    _write(args.out, epki.to_der())
    return 0


def _cmd_p8_unwrap(args) -> int:
    epki = keystore.EncryptedPrivateKeyInfo.from_der(_read(args.infile))
    info = keystore.decrypt_private_key(epki, args.password.encode())
    _write(args.out, info.to_der())
    return 0


def _cmd_csr_new(args) -> int:
    rng = _build_rng(args)
    private = _load_private(args.key)
    pairs = [("commonName", args.cn)]
    if args.org:
        pairs.append(("organization", args.org))
    if args.country:
        pairs.append(("country", args.country))
    if args.email:
        pairs.append(("emailAddress", args.email))
    attrs = ()
    if args.challenge:
        attrs = (keystore.attribute_make("challengePassword", args.challenge),)
    request = csr_mod.build_csr(csr_mod.Name(tuple(pairs)),
                                (private.public_key, private), attrs, rng)
    _write(args.out, request.to_der())
    return 0


def _cmd_csr_verify(args) -> int:
    ok = csr_mod.verify_csr(csr_mod.CertificationRequest.from_der(_read(args.infile)))
    print("verified" if ok else "verification failed")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# CMS commands


def _cmd_cms_sign(args) -> int:
    rng = _build_rng(args)
    attrs = ()
    if args.signing_time:
        attrs = (keystore.attribute_make("signingTime", args.signing_time),)
    ident = cms.SignerIdent(csr_mod.Name((("commonName", args.cn),)), b"cli")
    signed = cms.sign_data(cms.make_data(_read(args.infile)), _load_private(args.key),
                           ident, attrs, rng)
    _write(args.out, signed.to_der())
    return 0


def _cmd_cms_verify(args) -> int:
    ci = cms.ContentInfo.from_der(_read(args.infile))
    try:
        inner, _ = cms.verify_signed(ci, _load_public(args.key))
    except (cms.DigestMismatch, cms.SignatureInvalid) as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 1
    if args.out:
        _write(args.out, cms.data_payload(inner))
    print("verified")
    return 0


def _cmd_cms_envelope(args) -> int:
    rng = _build_rng(args)
    enveloped = cms.envelope(cms.make_data(_read(args.infile)),
                             _load_public(args.key), rng)
    _write(args.out, enveloped.to_der())
    return 0


def _cmd_cms_open(args) -> int:
    inner = cms.open_envelope(cms.ContentInfo.from_der(_read(args.infile)),
                              _load_private(args.key))
    _write(args.out, cms.data_payload(inner))
    return 0


def _cmd_cms_digest(args) -> int:
    if args.check:
        ok = cms.check_digest(cms.ContentInfo.from_der(_read(args.infile)))
        print("digest ok" if ok else "digest mismatch")
        return 0 if ok else 1
    if not args.out:
        raise ValueError("--out is required unless --check is given")
    _write(args.out, cms.digest_data(cms.make_data(_read(args.infile))).to_der())
    return 0


def _cmd_cms_encrypt(args) -> int:
    key = _hex_arg(args.key_hex)
    if args.decrypt:
        inner = cms.decrypt_data(cms.ContentInfo.from_der(_read(args.infile)), key)
        _write(args.out, cms.data_payload(inner))
        return 0
    rng = _build_rng(args)
    _write(args.out, cms.encrypt_data(cms.make_data(_read(args.infile)), key, rng).to_der())
    return 0


def _cmd_cms_auth(args) -> int:
    key = _hex_arg(args.key_hex)
    if args.check:
        ok = cms.check_auth(cms.ContentInfo.from_der(_read(args.infile)), key)
        print("tag ok" if ok else "tag mismatch")
        return 0 if ok else 1
    if not args.out:
        raise ValueError("--out is required unless --check is given")
    _write(args.out, cms.authenticate_data(cms.make_data(_read(args.infile)), key).to_der())
    return 0


# ---------------------------------------------------------------------------
# PFX commands


def _pfx_credentials(args) -> pfx_mod.PfxCredentials:
    return pfx_mod.PfxCredentials(
        privacy_password=args.password.encode() if args.password else None,
        integrity_password=(args.integrity_password or args.password).encode()
        if (args.integrity_password or args.password) else None,
        destination_pub=_load_public(args.dest_pub) if getattr(args, "dest_pub", None) else None,
        destination_priv=_load_private(args.dest_key) if getattr(args, "dest_key", None) else None,
        source_sign_key=_load_private(args.sign_key) if getattr(args, "sign_key", None) else None,
        source_verify_key=_load_public(args.source_pub) if getattr(args, "source_pub", None) else None,
        source_name=csr_mod.Name((("commonName", args.source_cn),))
        if getattr(args, "source_cn", None) else None,
    )


def _cmd_pfx_pack(args) -> int:
    rng = _build_rng(args)
    bags = []
    key_id = keystore.attribute_make("localKeyId", b"\x01")
    if args.key:
        info = keystore.decode_private_key_info(_read(args.key))
        if args.password:
            epki = keystore.encrypt_private_key(info, args.password.encode(),
                                                rng.read(8), pkcs5.DEFAULT_ITERATIONS, rng)
            bags.append(pfx_mod.SafeBag("shroudedKey", epki, (key_id,)))
        else:
            bags.append(pfx_mod.SafeBag("key", info, (key_id,)))
    if args.cert:
        cert = cms.ContentInfo.from_der(_read(args.cert))
        bags.append(pfx_mod.SafeBag("cert", cert, (key_id,)))
    pdu = pfx_mod.pfx_create(bags, args.privacy.replace("-", "_"),
                             args.integrity.replace("-", "_"),
                             _pfx_credentials(args), rng,
                             allow_plain_keys=args.allow_plain_keys)
    _write(args.out, pdu.to_der())
    return 0


def _cmd_pfx_unpack(args) -> int:
    pdu = pfx_mod.PfxPdu.from_der(_read(args.infile))
    bags = pfx_mod.pfx_open(pdu, _pfx_credentials(args))
    os.makedirs(args.out_dir, exist_ok=True)
    for index, bag in enumerate(bags):
        if bag.bag_type == "cert":
            payload, suffix = bag.value.to_der(), "cms"
        else:
            payload, suffix = bag.value.to_der(), ("p8" if bag.bag_type == "key" else "p8e")
        _write(os.path.join(args.out_dir, f"bag{index}.{suffix}"), payload)
    print(f"unpacked {len(bags)} bags")
    return 0


# ---------------------------------------------------------------------------
# token demo


def _cmd_token_demo(args) -> int:
    rng = _build_rng(args)
    token = Token("demo-token", rng)
    token.initialize("so-pin")
    session = token.open_session(rw=True)
    token.login(session, token_mod.USER_SO, "so-pin")
    token.init_user_pin(session, "user-pin")
    token.logout(session)
    token.login(session, token_mod.USER_NORMAL, "user-pin")
    pub_h, priv_h = token.generate_key_pair(session, 1024, label="demo")
    challenge = token.random(session, 16)
    signature = token.sign(session, priv_h, challenge)
    print(f"challenge={challenge.hex()}")
    print(f"signature ok: {token.verify(session, pub_h, challenge, signature)}")
    try:
        token.get_attribute(session, priv_h, token_mod.CKA_VALUE)
    except token_mod.AttributeSensitive:
        print("private key value: refused (sensitive)")
    print(export_pkcs15_layout(token), end="")
    return 0


def _cmd_strength(args) -> int:
    value = rsa.strength_lookup(args.bits, args.primes)
    print("absent" if value is None else value)
    return 0


# ---------------------------------------------------------------------------
# the end-to-end scenario

SCENARIO_STEPS = (
    "keypair-generation",
    "natural-person-attributes",
    "certification-request",
    "enveloped-transport",
    "certificate-issuance",
    "private-key-wrapping",
    "pfx-transfer",
    "token-provisioning",
    "challenge-response",
)

FAULT_POINTS = ("transport", "pfx", "challenge")

_ALICE_PASSWORD = b"alice-card-pin"
_TRANSFER_PRIVACY = b"transfer-privacy"
_TRANSFER_INTEGRITY = b"transfer-integrity"
_SIGNING_TIME = "200601021504Z"


def _fingerprint(data: bytes) -> str:
    from .primitives import SHA256
    return SHA256.digest(data)[:8].hex()


def run_scenario(seed: bytes, fault: str | None = None) -> tuple[str, bool]:
    """Replay the enrollment flow; returns (report, all_steps_passed)."""
    if fault is not None and fault not in FAULT_POINTS:
        raise ValueError(f"unknown fault point {fault!r}")
    rng = SeededSource(seed)
    lines = [
        "smart-card enrollment scenario",
        f"seed={seed.hex()}",
        f"fault={fault or 'none'}",
    ]
    state: dict = {}
    steps = {
        "keypair-generation": _step_keypair,
        "natural-person-attributes": _step_attributes,
        "certification-request": _step_csr,
        "enveloped-transport": _step_transport,
        "certificate-issuance": _step_issue,
        "private-key-wrapping": _step_wrap,
        "pfx-transfer": _step_pfx,
        "token-provisioning": _step_provision,
        "challenge-response": _step_challenge,
    }
    passed = 0
    failed_at = None
    for index, name in enumerate(SCENARIO_STEPS, start=1):
        try:
            detail = steps[name](state, rng, fault)
        except ScenarioStepFailed as exc:
            lines.append(f"step {index}/9 {name:<26} FAIL  {exc.reason}")
            failed_at = name
            break
        except Exception as exc:
            lines.append(f"step {index}/9 {name:<26} FAIL  {type(exc).__name__}: {exc}")
            failed_at = name
            break
        lines.append(f"step {index}/9 {name:<26} PASS  {detail}")
        passed += 1
    if failed_at is None:
        lines.append(f"result: {passed}/9 steps passed")
    else:
        lines.append(f"result: {passed}/9 steps passed, failed at {failed_at}")
    if "manifest" in state:
        lines.append("token directory:")
        lines.append(state["manifest"].rstrip("\n"))
    return "\n".join(lines) + "\n", failed_at is None


def _step_keypair(state, rng, fault):
    public, private = rsa.generate_key(1024, 2, 65537, rng)
    probe = 0x1234567890ABCDEF
    if rsa.rsa_private_op(rsa.rsa_public_op(probe, public), private) != probe:
        raise ScenarioStepFailed("keypair-generation", "operation identity failed")
    state["alice_pub"], state["alice_priv"] = public, private
    state["ca_pub"], state["ca_priv"] = rsa.generate_key(1024, 2, 65537, rng)
    return f"|n|={public.n.bit_length()} bits, u={private.u}, e={public.e}"


def _step_attributes(state, rng, fault):
    bundle = keystore.natural_person_bundle(
        email_address="alice@example.org",
        country_of_citizenship="US",
        place_of_birth="Springfield",
        date_of_birth="19800101000000Z",
        gender="F",
    )
    for attribute in bundle:
        recoded = keystore.Attribute.from_der_value(
            der_decode(der_encode(attribute.to_der_value())))
        if recoded != attribute:
            raise ScenarioStepFailed("natural-person-attributes", "attribute round-trip failed")
    state["bundle"] = bundle
    return f"{len(bundle)} attributes"


def _step_csr(state, rng, fault):
    subject = csr_mod.Name((
        ("commonName", "Alice Example"),
        ("organization", "Example Credit Union"),
        ("country", "US"),
        ("emailAddress", "alice@example.org"),
    ))
    request = csr_mod.build_csr(
        subject, (state["alice_pub"], state["alice_priv"]),
        (keystore.attribute_make("challengePassword", "revoke-me-not"),), rng)
    if not csr_mod.verify_csr(request):
        raise ScenarioStepFailed("certification-request", "self-signature failed")
    state["subject"], state["request"] = subject, request
    return f"csr={_fingerprint(request.to_der())}"


def _step_transport(state, rng, fault):
    enveloped = cms.envelope(cms.make_data(state["request"].to_der()),
                             state["ca_pub"], rng)
    wire = bytearray(enveloped.to_der())
    if fault == "transport":
        wire[len(wire) // 2] ^= 0x01
    try:
        received = cms.open_envelope(cms.ContentInfo.from_der(bytes(wire)),
                                     state["ca_priv"])
        request = csr_mod.CertificationRequest.from_der(cms.data_payload(received))
        ok = csr_mod.verify_csr(request)
    except Exception as exc:
        raise ScenarioStepFailed("enveloped-transport", f"CA could not open: {type(exc).__name__}")
    if not ok:
        raise ScenarioStepFailed("enveloped-transport", "request invalid after transport")
    state["ca_request"] = request
    return f"envelope={_fingerprint(bytes(wire))}"


def _step_issue(state, rng, fault):
    ca_name = csr_mod.Name((("commonName", "Toy Issuing CA"), ("country", "US")))
    certificate = cms.toy_issue(state["ca_request"], state["ca_priv"], ca_name, 1001, rng)
    cms.verify_signed(certificate, state["ca_pub"])
    subject, public, serial, issuer = cms.cert_fields(certificate)
    if subject != state["subject"] or public != state["alice_pub"]:
        raise ScenarioStepFailed("certificate-issuance", "certificate binds the wrong identity")
    state["certificate"] = certificate
    return f"serial={serial} cert={_fingerprint(certificate.to_der())}"


def _step_wrap(state, rng, fault):
    info = keystore.PrivateKeyInfo(state["alice_priv"], state["bundle"])
    epki = keystore.encrypt_private_key(info, _ALICE_PASSWORD, rng.read(8), 2048, rng)
    if keystore.decrypt_private_key(epki, _ALICE_PASSWORD) != info:
        raise ScenarioStepFailed("private-key-wrapping", "wrap/unwrap mismatch")
    state["info"], state["epki"] = info, epki
    return f"epki={_fingerprint(epki.to_der())}"


def _step_pfx(state, rng, fault):
    key_id = keystore.attribute_make("localKeyId", b"\x01")
    bags = (
        pfx_mod.SafeBag("shroudedKey", state["epki"],
                        (key_id, keystore.attribute_make("friendlyName", "alice-key"))),
        pfx_mod.SafeBag("cert", state["certificate"],
                        (key_id, keystore.attribute_make("friendlyName", "alice-cert"))),
    )
    credentials = pfx_mod.PfxCredentials(privacy_password=_TRANSFER_PRIVACY,
                                         integrity_password=_TRANSFER_INTEGRITY)
    pdu = pfx_mod.pfx_create(bags, pfx_mod.PRIVACY_PASSWORD,
                             pfx_mod.INTEGRITY_PASSWORD, credentials, rng)
    state["bags"], state["pfx_der"] = bags, pdu.to_der()
    return f"pfx={_fingerprint(state['pfx_der'])} bags={len(bags)}"


def _step_provision(state, rng, fault):
    wire = bytearray(state["pfx_der"])
    if fault == "pfx":
        wire[len(wire) // 2] ^= 0x01
    credentials = pfx_mod.PfxCredentials(privacy_password=_TRANSFER_PRIVACY,
                                         integrity_password=_TRANSFER_INTEGRITY)
    try:
        bags = pfx_mod.pfx_open(pfx_mod.PfxPdu.from_der(bytes(wire)), credentials)
    except IntegrityFailure:
        raise ScenarioStepFailed("token-provisioning", "PFX integrity check failed")
    except Exception as exc:
        raise ScenarioStepFailed("token-provisioning", f"PFX unusable: {type(exc).__name__}")
    if bags != state["bags"]:
        raise ScenarioStepFailed("token-provisioning", "bags arrived altered")
    shrouded = next(b for b in bags if b.bag_type == "shroudedKey")
    cert_bag = next(b for b in bags if b.bag_type == "cert")
    info = keystore.decrypt_private_key(shrouded.value, _ALICE_PASSWORD)
    token = Token("alice-card", rng)
    token.initialize("so-factory-pin")
    session = token.open_session(rw=True)
    token.login(session, token_mod.USER_SO, "so-factory-pin")
    token.init_user_pin(session, _ALICE_PASSWORD.decode())
    token.logout(session)
    token.login(session, token_mod.USER_NORMAL, _ALICE_PASSWORD.decode())
    key_handle = token.create_object(session, token_mod.CLASS_KEY, {
        token_mod.CKA_VALUE: keystore.encode_private_key(info.key),
        token_mod.CKA_KEY_TYPE: "rsa", token_mod.CKA_KEY_KIND: "private",
        token_mod.CKA_ID: b"\x01", token_mod.CKA_LABEL: "alice-key",
        token_mod.CKA_PRIVATE: True, token_mod.CKA_SENSITIVE: True,
        token_mod.CKA_EXTRACTABLE: False, token_mod.CKA_SIGN: True,
    })
    token.create_object(session, token_mod.CLASS_CERTIFICATE, {
        token_mod.CKA_VALUE: cert_bag.value.to_der(),
        token_mod.CKA_SUBJECT: "CN=Alice Example", token_mod.CKA_ID: b"\x01",
        token_mod.CKA_LABEL: "alice-cert",
    })
    token.create_object(session, token_mod.CLASS_DATA, {
        token_mod.CKA_VALUE: shrouded.value.to_der(),
        token_mod.CKA_LABEL: "alice-epki",
    })
    manifest = export_pkcs15_layout(token)
    for required in ("EF(PrKDF): 1", "EF(CDF): 1", "EF(DODF): 1"):
        if required not in manifest:
            raise ScenarioStepFailed("token-provisioning", "directory export incomplete")
    state["token"], state["session"], state["key_handle"] = token, session, key_handle
    state["manifest"] = manifest
    return "card initialized, 3 objects stored"


def _step_challenge(state, rng, fault):
    challenge = rng.read(32)
    signature = bytearray(state["token"].sign(state["session"], state["key_handle"],
                                              challenge))
    if fault == "challenge":
        signature[0] ^= 0x01
    _subject, public, _serial, _issuer = cms.cert_fields(state["certificate"])
    if not pkcs1.verify(challenge, bytes(signature), public):
        raise ScenarioStepFailed("challenge-response", "signature rejected by verifier")
    return f"challenge={challenge[:8].hex()} sig={_fingerprint(bytes(signature))}"


def _cmd_scenario(args) -> int:
    seed = bytes.fromhex((args.seed or os.environ.get("PKCSWB_SEED")
                          or "000102030405060708090a0b0c0d0e0f").removeprefix("0x"))
    report, ok = run_scenario(seed, args.fault)
    print(report, end="")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pkcswb",
        description="Desk-scale PKCS workbench: keys, paddings, containers, token.")
    parser.add_argument("--seed", default=None,
                        help="hex seed for a deterministic random source "
                        "(or set PKCSWB_SEED)")
    # accepted on either side of the subcommand; SUPPRESS keeps the
    # subcommand-level flag from clobbering a top-level value
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", parents=[common], help="generate a multiprime RSA key")
    p.add_argument("--bits", type=int, default=1024)
    p.add_argument("--primes", type=int, default=2)
    p.add_argument("--e", type=int, default=65537)
    p.add_argument("--out", required=True)
    p.add_argument("--pub")
    p.set_defaults(func=_cmd_keygen)

    for name, func in (("rsa-encrypt", _cmd_rsa_encrypt), ("rsa-decrypt", _cmd_rsa_decrypt)):
        p = sub.add_parser(name, parents=[common], help=f"{name.split('-')[1]} with v1_5 or OAEP padding")
        p.add_argument("--key", required=True)
        p.add_argument("--in", dest="infile", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--scheme", choices=[pkcs1.SCHEME_V15, pkcs1.SCHEME_OAEP],
                       default=pkcs1.SCHEME_OAEP)
        p.set_defaults(func=func)

    p = sub.add_parser("sign", parents=[common], help="RSASSA-PSS signature")
    p.add_argument("--key", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sign)

    p = sub.add_parser("verify", parents=[common], help="verify an RSASSA-PSS signature")
    p.add_argument("--key", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--sig", required=True)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("kdf", parents=[common], help="PBKDF2 key derivation")
    p.add_argument("--password", required=True)
    p.add_argument("--salt", required=True, help="hex, 0x prefix allowed")
    p.add_argument("--iter", dest="iterations", type=int, default=pkcs5.DEFAULT_ITERATIONS)
    p.add_argument("--len", dest="length", type=int, default=32)
    p.set_defaults(func=_cmd_kdf)

    p = sub.add_parser("p8-wrap", parents=[common], help="encrypt a private key (PBES2)")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--password", required=True)
    p.add_argument("--iter", dest="iterations", type=int, default=pkcs5.DEFAULT_ITERATIONS)
    p.add_argument("--salt-len", type=int, default=pkcs5.DEFAULT_SALT_LEN)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_p8_wrap)

    p = sub.add_parser("p8-unwrap", parents=[common], help="decrypt an encrypted private key")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--password", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_p8_unwrap)

    p = sub.add_parser("csr-new", parents=[common], help="build a self-signed certification request")
    p.add_argument("--key", required=True)
    p.add_argument("--cn", required=True)
    p.add_argument("--org")
    p.add_argument("--country")
    p.add_argument("--email")
    p.add_argument("--challenge")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_csr_new)

    p = sub.add_parser("csr-verify", parents=[common], help="verify a certification request")
    p.add_argument("--in", dest="infile", required=True)
    p.set_defaults(func=_cmd_csr_verify)

    p = sub.add_parser("cms-sign", parents=[common], help="wrap a file in signed-data")
    p.add_argument("--key", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--cn", default="CLI Signer")
    p.add_argument("--signing-time", help="YYMMDDHHMMSSZ attribute value")
    p.set_defaults(func=_cmd_cms_sign)

    p = sub.add_parser("cms-verify", parents=[common], help="verify signed-data")
    p.add_argument("--key", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_cms_verify)

    p = sub.add_parser("cms-envelope", parents=[common], help="wrap a file in enveloped-data")
    p.add_argument("--key", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_cms_envelope)

    p = sub.add_parser("cms-open", parents=[common], help="open enveloped-data")
    p.add_argument("--key", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_cms_open)

    p = sub.add_parser("cms-digest", parents=[common], help="make or check digested-data")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out")
    p.add_argument("--check", action="store_true")
    p.set_defaults(func=_cmd_cms_digest)

    p = sub.add_parser("cms-encrypt", parents=[common], help="encrypted-data under a pre-shared key")
    p.add_argument("--key-hex", required=True, help="16-octet AES key, hex")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--decrypt", action="store_true")
    p.set_defaults(func=_cmd_cms_encrypt)

    p = sub.add_parser("cms-auth", parents=[common], help="authenticated-data under a pre-shared key")
    p.add_argument("--key-hex", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out")
    p.add_argument("--check", action="store_true")
    p.set_defaults(func=_cmd_cms_auth)

    p = sub.add_parser("pfx-pack", parents=[common], help="pack key/cert bags into a PFX")
    p.add_argument("--privacy", choices=["password", "public-key"], required=True)
    p.add_argument("--integrity", choices=["password", "public-key"], required=True)
    p.add_argument("--key", help="private key to shroud and carry")
    p.add_argument("--cert", help="toy certificate (CMS signed-data file)")
    p.add_argument("--password")
    p.add_argument("--integrity-password")
    p.add_argument("--dest-pub")
    p.add_argument("--sign-key")
    p.add_argument("--source-cn")
    p.add_argument("--allow-plain-keys", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_pfx_pack)

    p = sub.add_parser("pfx-unpack", parents=[common], help="open a PFX and write its bags out")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--password")
    p.add_argument("--integrity-password")
    p.add_argument("--dest-key")
    p.add_argument("--source-pub")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_pfx_unpack)

    p = sub.add_parser("token-demo", parents=[common], help="exercise the software token")
    p.set_defaults(func=_cmd_token_demo)

    p = sub.add_parser("strength", parents=[common], help="symmetric-equivalent strength lookup")
    p.add_argument("--bits", type=int, required=True)
    p.add_argument("--primes", type=int, required=True)
    p.set_defaults(func=_cmd_strength)

    p = sub.add_parser("scenario", parents=[common], help="replay the enrollment scenario")
    p.add_argument("--fault", choices=list(FAULT_POINTS))
    p.set_defaults(func=_cmd_scenario)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DecryptionError, IntegrityFailure, cms.DigestMismatch,
            cms.SignatureInvalid, token_mod.TokenError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, MissingCredential, UnsupportedAlgorithm, ValueError,
            keystore.MalformedKey, csr_mod.MalformedRequest, asn1.DerError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
