"""pkcswb: a desk-scale PKCS workbench.

DER serialization, multiprime RSA with CRT, the v1.5/OAEP/PSS message
encodings, password-based key derivation and encryption, private-key and
certification-request containers, a CMS content-type engine, PFX exchange,
and a cryptoki-style software token, plus a CLI that replays a smart-card
enrollment scenario end to end.
"""

from . import asn1, cms, csr, errors, keystore, oids, pfx, pkcs1, pkcs5, \
    primitives, rsa, token

__version__ = "0.1.0"

__all__ = [
    "asn1", "cms", "csr", "errors", "keystore", "oids", "pfx", "pkcs1",
    "pkcs5", "primitives", "rsa", "token", "__version__",
]
