"""Object identifiers used across the container modules."""

from .asn1 import Oid

# PKCS #1 algorithm family
RSA_ENCRYPTION = Oid.parse("1.2.840.113549.1.1.1")
RSAES_OAEP = Oid.parse("1.2.840.113549.1.1.7")
MGF1 = Oid.parse("1.2.840.113549.1.1.8")
RSASSA_PSS = Oid.parse("1.2.840.113549.1.1.10")

# hashes and MACs
SHA256 = Oid.parse("2.16.840.1.101.3.4.2.1")
HMAC_WITH_SHA256 = Oid.parse("1.2.840.113549.2.9")

# PKCS #5 v2.0
PBKDF2 = Oid.parse("1.2.840.113549.1.5.12")
PBES2 = Oid.parse("1.2.840.113549.1.5.13")

# legacy password-based encryption; recognized only to be refused
LEGACY_PBE = frozenset(
    [Oid.parse(f"1.2.840.113549.1.5.{n}") for n in (1, 3, 4, 6, 10, 11)]
    + [Oid.parse(f"1.2.840.113549.1.12.1.{n}") for n in range(1, 7)]
)

# symmetric cipher
AES128_CBC = Oid.parse("2.16.840.1.101.3.4.1.2")

# CMS content types
CT_DATA = Oid.parse("1.2.840.113549.1.7.1")
CT_SIGNED_DATA = Oid.parse("1.2.840.113549.1.7.2")
CT_ENVELOPED_DATA = Oid.parse("1.2.840.113549.1.7.3")
CT_DIGESTED_DATA = Oid.parse("1.2.840.113549.1.7.5")
CT_ENCRYPTED_DATA = Oid.parse("1.2.840.113549.1.7.6")
CT_AUTHENTICATED_DATA = Oid.parse("1.2.840.113549.1.9.16.1.2")

# PKCS #9 attribute types used by the other standards
AT_CONTENT_TYPE = Oid.parse("1.2.840.113549.1.9.3")
AT_MESSAGE_DIGEST = Oid.parse("1.2.840.113549.1.9.4")
AT_SIGNING_TIME = Oid.parse("1.2.840.113549.1.9.5")
AT_COUNTER_SIGNATURE = Oid.parse("1.2.840.113549.1.9.6")
AT_CHALLENGE_PASSWORD = Oid.parse("1.2.840.113549.1.9.7")
AT_EXTENSION_REQUEST = Oid.parse("1.2.840.113549.1.9.14")
AT_FRIENDLY_NAME = Oid.parse("1.2.840.113549.1.9.20")
AT_LOCAL_KEY_ID = Oid.parse("1.2.840.113549.1.9.21")
AT_RANDOM_NONCE = Oid.parse("1.2.840.113549.1.9.25.3")
AT_SEQUENCE_NUMBER = Oid.parse("1.2.840.113549.1.9.25.4")

# naturalPerson / pkcsEntity attribute bundle types
AT_EMAIL_ADDRESS = Oid.parse("1.2.840.113549.1.9.1")
AT_UNSTRUCTURED_NAME = Oid.parse("1.2.840.113549.1.9.2")
AT_UNSTRUCTURED_ADDRESS = Oid.parse("1.2.840.113549.1.9.8")
AT_DATE_OF_BIRTH = Oid.parse("1.3.6.1.5.5.7.9.1")
AT_PLACE_OF_BIRTH = Oid.parse("1.3.6.1.5.5.7.9.2")
AT_GENDER = Oid.parse("1.3.6.1.5.5.7.9.3")
AT_COUNTRY_OF_CITIZENSHIP = Oid.parse("1.3.6.1.5.5.7.9.4")
AT_COUNTRY_OF_RESIDENCE = Oid.parse("1.3.6.1.5.5.7.9.5")
AT_PSEUDONYM = Oid.parse("2.5.4.65")
AT_SERIAL_NUMBER = Oid.parse("2.5.4.5")
AT_PKCS7_PDU = Oid.parse("1.2.840.113549.1.9.25.5")
AT_USER_PKCS12 = Oid.parse("2.16.840.1.113730.3.1.216")
AT_PKCS15_TOKEN = Oid.parse("1.2.840.113549.1.9.25.1")
AT_ENCRYPTED_PRIVATE_KEY_INFO = Oid.parse("1.2.840.113549.1.9.25.2")

# X.520 name components
CN = Oid.parse("2.5.4.3")
COUNTRY = Oid.parse("2.5.4.6")
ORGANIZATION = Oid.parse("2.5.4.10")

# PKCS #12 bag types
KEY_BAG = Oid.parse("1.2.840.113549.1.12.10.1.1")
SHROUDED_KEY_BAG = Oid.parse("1.2.840.113549.1.12.10.1.2")
CERT_BAG = Oid.parse("1.2.840.113549.1.12.10.1.3")
