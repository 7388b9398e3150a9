"""Multiprime RSA: key material, prime generation, raw modular operations.

Keys are products of u >= 2 distinct primes of roughly equal size.  The
decryption exponent is taken modulo lcm(r_i - 1), and the private operation
recombines per-prime exponentiations with the incremental CRT coefficients
t_i (inverse of the partial product R_i = r_1 * ... * r_{i-1} modulo r_i).

Desk-scale keys are first class: nothing below enforces a minimum modulus
beyond arithmetic validity, so exhaustive sweeps over toy moduli stay cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .primitives import RandomSource, RngExhausted

__all__ = [
    "RsaPublicKey",
    "RsaPrivateKey",
    "MessageRepresentativeOutOfRange",
    "CiphertextRepresentativeOutOfRange",
    "BadExponent",
    "DuplicatePrime",
    "generate_prime",
    "generate_key",
    "key_from_primes",
    "rsa_public_op",
    "rsa_private_op",
    "STRENGTH_TABLE",
    "strength_lookup",
    "nfs_advisory_estimate",
]


class MessageRepresentativeOutOfRange(ValueError):
    pass


class CiphertextRepresentativeOutOfRange(ValueError):
    pass


class BadExponent(ValueError):
    """gcd(e, r_i - 1) != 1 persisted past the retry budget."""


class DuplicatePrime(ValueError):
    """The source kept producing an already-used prime."""


@dataclass(frozen=True)
class RsaPublicKey:
    n: int
    e: int

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("modulus too small")
        if self.e < 3 or self.e % 2 == 0:
            raise ValueError("encryption exponent must be odd and >= 3")

    @property
    def modulus_bits(self) -> int:
        return self.n.bit_length()

    @property
    def modulus_octets(self) -> int:
        return (self.n.bit_length() + 7) // 8


@dataclass(frozen=True)
class RsaPrivateKey:
    """Multiprime private key with CRT material.

    ``crt_exponents`` holds d_i = e^-1 mod (r_i - 1) for every prime;
    ``crt_coefficients`` and ``prime_products`` hold t_i and
    R_i = r_1 * ... * r_{i-1} for i >= 2, aligned so index j describes
    prime j+1.
    """

    version: int
    n: int
    e: int
    d: int
    primes: tuple[int, ...]
    crt_exponents: tuple[int, ...]
    crt_coefficients: tuple[int, ...]
    prime_products: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "primes", tuple(self.primes))
        object.__setattr__(self, "crt_exponents", tuple(self.crt_exponents))
        object.__setattr__(self, "crt_coefficients", tuple(self.crt_coefficients))
        object.__setattr__(self, "prime_products", tuple(self.prime_products))
        self.check()

    @property
    def u(self) -> int:
        return len(self.primes)

    @property
    def public_key(self) -> RsaPublicKey:
        return RsaPublicKey(self.n, self.e)

    @property
    def modulus_octets(self) -> int:
        return (self.n.bit_length() + 7) // 8

    def check(self) -> None:
        u = len(self.primes)
        if u < 2:
            raise ValueError("at least two primes required")
        if len(set(self.primes)) != u:
            raise ValueError("primes must be distinct")
        if self.version != (0 if u == 2 else 1):
            raise ValueError("version must be 0 for two primes, 1 otherwise")
        if len(self.crt_exponents) != u:
            raise ValueError("one CRT exponent per prime required")
        if len(self.crt_coefficients) != u - 1 or len(self.prime_products) != u - 1:
            raise ValueError("CRT coefficients/products required for primes 2..u")
        n = math.prod(self.primes)
        if n != self.n:
            raise ValueError("modulus is not the product of the primes")
        chi = math.lcm(*[r - 1 for r in self.primes])
        if (self.e * self.d) % chi != 1:
            raise ValueError("e*d != 1 modulo lcm(r_i - 1)")
        for r, d_i in zip(self.primes, self.crt_exponents):
            if (self.e * d_i) % (r - 1) != 1:
                raise ValueError("bad CRT exponent")
        product = self.primes[0]
        for i in range(1, u):
            r, t = self.primes[i], self.crt_coefficients[i - 1]
            if self.prime_products[i - 1] != product:
                raise ValueError("bad partial prime product")
            if not 0 < t < r or (product * t) % r != 1:
                raise ValueError("bad CRT coefficient")
            product *= r


# ---------------------------------------------------------------------------
# prime generation

_SMALL_PRIMES: list[int] = []
_sieve = bytearray([1]) * 1000
for _i in range(2, 1000):
    if _sieve[_i]:
        _SMALL_PRIMES.append(_i)
        for _j in range(_i * _i, 1000, _i):
            _sieve[_j] = 0
del _sieve, _i


def _is_probable_prime(n: int, rng: RandomSource, rounds: int) -> bool:
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n == p:
            return True
        if n % p == 0:
            return False
    if n < _SMALL_PRIMES[-1] ** 2:
        return True
    # Miller-Rabin with witnesses drawn from the supplied source
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    width = (n.bit_length() + 7) // 8
    for _ in range(rounds):
        a = 2 + int.from_bytes(rng.read(width), "big") % (n - 3)
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = pow(x, 2, n)
            if x == n - 1:
                break
        else:
            return False
    return True


def generate_prime(bits: int, rng: RandomSource, rounds: int = 40) -> int:
    """Probable prime of exactly `bits` bits (top bit set), Miller-Rabin `rounds`."""
    if bits < 8:
        raise ValueError("need at least 8 bits")
    # expected candidates ~ bits * ln(2) / 2; the budget only trips for
    # degenerate sources that keep proposing the same composite
    for _ in range(200 * bits):
        candidate = int.from_bytes(rng.read((bits + 7) // 8), "big")
        candidate &= (1 << bits) - 1
        candidate |= (1 << (bits - 1)) | 1
        if _is_probable_prime(candidate, rng, rounds):
            return candidate
    raise RngExhausted("source never produced a prime candidate")


def _crt_material(primes: tuple[int, ...], e: int) -> tuple[int, tuple, tuple, tuple]:
    chi = math.lcm(*[r - 1 for r in primes])
    d = pow(e, -1, chi)
    exponents = tuple(pow(e, -1, r - 1) for r in primes)
    coefficients = []
    products = []
    running = primes[0]
    for r in primes[1:]:
        products.append(running)
        coefficients.append(pow(running, -1, r))
        running *= r
    return d, exponents, tuple(coefficients), tuple(products)


def key_from_primes(primes, e: int) -> tuple[RsaPublicKey, RsaPrivateKey]:
    """Build a key pair from explicitly chosen distinct odd primes (tests, demos)."""
    primes = tuple(primes)
    if len(primes) < 2:
        raise ValueError("at least two primes required")
    if any(r < 3 or r % 2 == 0 for r in primes):
        raise ValueError("primes must be odd and >= 3")
    for r in primes:
        if math.gcd(e, r - 1) != 1:
            raise BadExponent(f"gcd(e, {r} - 1) != 1")
    d, exponents, coefficients, products = _crt_material(primes, e)
    n = math.prod(primes)
    private = RsaPrivateKey(0 if len(primes) == 2 else 1, n, e, d,
                            primes, exponents, coefficients, products)
    return private.public_key, private


def generate_key(modulus_bits: int, u: int, e: int,
                 rng: RandomSource) -> tuple[RsaPublicKey, RsaPrivateKey]:
    """Generate a u-prime key with a modulus of exactly `modulus_bits` bits."""
    if u < 2:
        raise ValueError("u must be at least 2")
    if modulus_bits // u < 16:
        raise ValueError("primes would fall below 16 bits")
    if e < 3 or e % 2 == 0:
        raise ValueError("encryption exponent must be odd and >= 3")
    base, extra = divmod(modulus_bits, u)
    sizes = [base + 1] * extra + [base] * (u - extra)
    for _ in range(200):
        primes: list[int] = []
        for bits in sizes:
            for attempt in range(200):
                r = generate_prime(bits, rng)
                if math.gcd(e, r - 1) != 1:
                    if attempt == 199:
                        raise BadExponent("could not find a prime with gcd(e, r-1) = 1")
                    continue
                if r in primes:
                    if attempt == 199:
                        raise DuplicatePrime("prime source keeps repeating itself")
                    continue
                primes.append(r)
                break
        n = math.prod(primes)
        if n.bit_length() != modulus_bits:
            continue
        d, exponents, coefficients, products = _crt_material(tuple(primes), e)
        private = RsaPrivateKey(0 if u == 2 else 1, n, e, d, tuple(primes),
                                exponents, coefficients, products)
        return private.public_key, private
    raise ValueError("could not reach the requested modulus size")


# ---------------------------------------------------------------------------
# raw operations


def rsa_public_op(m: int, pk: RsaPublicKey) -> int:
    """m^e mod n for a message representative m in [0, n)."""
    if not 0 <= m < pk.n:
        raise MessageRepresentativeOutOfRange("message representative out of range")
    return pow(m, pk.e, pk.n)


def rsa_private_op(c: int, sk: RsaPrivateKey) -> int:
    """c^d mod n via per-prime exponentiation and CRT recombination."""
    if not 0 <= c < sk.n:
        raise CiphertextRepresentativeOutOfRange("ciphertext representative out of range")
    result = pow(c, sk.crt_exponents[0], sk.primes[0])
    product = sk.primes[0]
    for i in range(1, sk.u):
        r = sk.primes[i]
        m_i = pow(c, sk.crt_exponents[i], r)
        t_i = sk.crt_coefficients[i - 1]
        result += product * ((m_i - result) * t_i % r)
        product *= r
    return result


# ---------------------------------------------------------------------------
# strength data

# Symmetric-equivalent strength of multiprime moduli under an NFS-factoring
# attacker, keyed by (modulus bits, prime count).  Opaque data; no
# interpolation is offered.
STRENGTH_TABLE: dict[tuple[int, int], int] = {
    (1024, 2): 80,
    (1024, 3): 73,
    (2335, 3): 112,
    (2335, 4): 100,
    (2335, 5): 88,
    (3072, 3): 128,
    (3072, 4): 117,
    (3072, 5): 103,
    (3072, 6): 93,
    (7680, 4): 192,
    (7680, 5): 175,
    (7680, 6): 158,
    (7680, 7): 144,
    (7680, 9): 125,
    (15360, 5): 256,
    (15360, 6): 235,
    (15360, 7): 215,
    (15360, 8): 199,
}


def strength_lookup(modulus_bits: int, u: int) -> int | None:
    """Exact table row, or None when the combination is not tabulated."""
    return STRENGTH_TABLE.get((modulus_bits, u))


def nfs_advisory_estimate(modulus_bits: int) -> float:
    """log2 of the NFS work factor L[1/3, (64/9)^(1/3)] at a 2^bits modulus.

    Advisory only: the asymptotic formula is not calibrated against the
    strength table and can sit several bits away from the tabulated rows.
    """
    if modulus_bits < 256:
        raise ValueError("estimate is meaningless below 256 bits")
    ln_n = modulus_bits * math.log(2)
    work = (64 / 9) ** (1 / 3) * ln_n ** (1 / 3) * math.log(ln_n) ** (2 / 3)
    return work / math.log(2)
