import math

import pytest

from oracles import is_prime_by_trial_division
from pkcswb import rsa
from pkcswb.primitives import ConstantSource, ExhaustibleSource, RngExhausted
from conftest import seeded


# -- hand-computed key material ----------------------------------------------


def test_two_prime_toy_key():
    public, private = rsa.key_from_primes((5, 11), 3)
    # chi = lcm(4, 10) = 20 and 3 * 7 = 21 = 1 mod 20
    assert private.d == 7
    assert public.n == 55 and private.version == 0


def test_three_prime_toy_key():
    public, private = rsa.key_from_primes((3, 5, 7), 5)
    assert private.d == 5
    assert private.crt_exponents == (1, 1, 5)
    assert private.crt_coefficients == (2, 1)   # 3*2 = 1 mod 5, 15 = 1 mod 7
    assert private.prime_products == (3, 15)
    assert private.version == 1


def test_u_below_two_rejected():
    with pytest.raises(ValueError):
        rsa.key_from_primes((5,), 3)
    with pytest.raises(ValueError):
        rsa.generate_key(64, 1, 3, seeded(b"x"))


def test_bad_exponent_rejected():
    with pytest.raises(rsa.BadExponent):
        rsa.key_from_primes((5, 11), 5)  # gcd(5, 4) = 1 but gcd(5, 10) = 5


# -- raw operations -----------------------------------------------------------


def test_public_op_examples():
    public, _ = rsa.key_from_primes((5, 11), 3)
    assert rsa.rsa_public_op(2, public) == 8
    assert rsa.rsa_public_op(0, public) == 0
    assert rsa.rsa_public_op(1, public) == 1
    assert rsa.rsa_public_op(54, public) == 54  # (-1)^odd = -1


def test_private_op_examples():
    _, private = rsa.key_from_primes((5, 11), 3)
    assert rsa.rsa_private_op(8, private) == 2
    assert rsa.rsa_private_op(0, private) == 0


def test_range_errors():
    public, private = rsa.key_from_primes((5, 11), 3)
    with pytest.raises(rsa.MessageRepresentativeOutOfRange):
        rsa.rsa_public_op(55, public)
    with pytest.raises(rsa.MessageRepresentativeOutOfRange):
        rsa.rsa_public_op(-1, public)
    with pytest.raises(rsa.CiphertextRepresentativeOutOfRange):
        rsa.rsa_private_op(55, private)


def test_exhaustive_multiprime_identity():
    public, private = rsa.key_from_primes((3, 5, 7), 5)
    for m in range(105):
        assert rsa.rsa_private_op(rsa.rsa_public_op(m, public), private) == m


def test_crt_equals_naive_exponentiation():
    _, private = rsa.key_from_primes((3, 5, 7), 5)
    for c in range(105):
        assert rsa.rsa_private_op(c, private) == pow(c, private.d, private.n)


def test_round_trip_identities_generated_key(key_512):
    public, private = key_512
    rng = seeded(b"ids")
    for _ in range(100):
        m = int.from_bytes(rng.read(64), "big") % public.n
        assert rsa.rsa_private_op(rsa.rsa_public_op(m, public), private) == m
        assert rsa.rsa_public_op(rsa.rsa_private_op(m, private), public) == m


def test_private_key_invariants_checked():
    _, private = rsa.key_from_primes((5, 11), 3)
    with pytest.raises(ValueError):
        rsa.RsaPrivateKey(0, private.n, private.e, private.d + 1, private.primes,
                          private.crt_exponents, private.crt_coefficients,
                          private.prime_products)
    with pytest.raises(ValueError):
        rsa.RsaPrivateKey(1, private.n, private.e, private.d, private.primes,
                          private.crt_exponents, private.crt_coefficients,
                          private.prime_products)  # version must match u


# -- prime generation ----------------------------------------------------------


def test_generate_prime_small_is_really_prime():
    for tag in (b"a", b"b", b"c", b"d"):
        p = rsa.generate_prime(8, seeded(b"prime8/" + tag))
        assert p >= 2**7
        assert all(p == q or p % q for q in range(2, 256) if q <= p)
        assert is_prime_by_trial_division(p)


@pytest.mark.parametrize("bits", [12, 16, 20])
def test_generate_prime_confirmed_by_trial_division(bits):
    for tag in (b"x", b"y", b"z"):
        p = rsa.generate_prime(bits, seeded(b"prime/%d/" % bits + tag))
        assert p.bit_length() == bits
        assert is_prime_by_trial_division(p)


def test_generate_prime_deterministic():
    assert rsa.generate_prime(16, seeded(b"det")) == rsa.generate_prime(16, seeded(b"det"))


def test_generate_prime_minimum_bits():
    with pytest.raises(ValueError):
        rsa.generate_prime(7, seeded(b"q"))


def test_generate_prime_exhausted_source():
    with pytest.raises(RngExhausted):
        rsa.generate_prime(16, ExhaustibleSource(b"\x00\x01"))


def test_duplicate_prime_detected():
    # constant 0x04 forces candidate 0x8405 = 33797, which is prime, so the
    # source keeps proposing the same prime over and over
    with pytest.raises(rsa.DuplicatePrime):
        rsa.generate_key(32, 2, 65537, ConstantSource(0x04))


def test_non_prime_constant_source_trips_candidate_budget():
    with pytest.raises(RngExhausted):
        rsa.generate_prime(16, ConstantSource(0xC5))  # 0xC5C5 = 197 * 257


# -- key generation -------------------------------------------------------------


@pytest.mark.parametrize("bits,u", [(64, 2), (96, 3), (128, 4), (512, 2)])
def test_generate_key_shapes(bits, u):
    public, private = rsa.generate_key(bits, u, 65537, seeded(b"shape%d" % u))
    assert public.n.bit_length() == bits
    assert private.u == u
    assert private.version == (0 if u == 2 else 1)
    chi = math.lcm(*[r - 1 for r in private.primes])
    assert (private.e * private.d) % chi == 1


def test_generate_key_determinism():
    a = rsa.generate_key(64, 2, 65537, seeded(b"same"))
    b = rsa.generate_key(64, 2, 65537, seeded(b"same"))
    assert a == b


# -- strength table --------------------------------------------------------------


_TABLE_ROWS = [
    (80, 1024, 2), (73, 1024, 3),
    (112, 2335, 3), (100, 2335, 4), (88, 2335, 5),
    (128, 3072, 3), (117, 3072, 4), (103, 3072, 5), (93, 3072, 6),
    (192, 7680, 4), (175, 7680, 5), (158, 7680, 6), (144, 7680, 7), (125, 7680, 9),
    (256, 15360, 5), (235, 15360, 6), (215, 15360, 7), (199, 15360, 8),
]


def test_strength_table_all_rows():
    assert len(rsa.STRENGTH_TABLE) == 18
    for strength, bits, u in _TABLE_ROWS:
        assert rsa.strength_lookup(bits, u) == strength


def test_strength_lookup_absent():
    assert rsa.strength_lookup(2048, 2) is None
    assert rsa.strength_lookup(1024, 4) is None


def test_nfs_estimate_monotone():
    assert rsa.nfs_advisory_estimate(2048) > rsa.nfs_advisory_estimate(1024)


def test_nfs_estimate_near_table_anchor():
    assert abs(rsa.nfs_advisory_estimate(1024) - 80) <= 10


def test_nfs_estimate_finite_positive():
    for bits in range(256, 16385, 512):
        value = rsa.nfs_advisory_estimate(bits)
        assert 0 < value < float("inf")
    with pytest.raises(ValueError):
        rsa.nfs_advisory_estimate(255)
