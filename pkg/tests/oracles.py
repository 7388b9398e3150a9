"""Independent reference implementations used only to cross-check the package.

Nothing here imports the code under test.  The SHA-256 oracle derives its
round constants from integer square/cube roots instead of transcribing them,
so it shares no tables with any other implementation; the PBKDF2 oracle is a
direct transliteration of the block/iteration formula that materializes every
U value before XOR-reducing.
"""

import hashlib
import hmac
import math
import struct

_MASK = 0xFFFFFFFF


def _icbrt(n: int) -> int:
    lo, hi = 0, 1 << ((n.bit_length() + 2) // 3 + 1)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid ** 3 <= n:
            lo = mid
        else:
            hi = mid - 1
    return lo


def _first_primes(count: int) -> list[int]:
    primes, n = [], 2
    while len(primes) < count:
        if all(n % p for p in primes if p * p <= n):
            primes.append(n)
        n += 1
    return primes


_PRIMES64 = _first_primes(64)
_H0 = [(math.isqrt(p << 64) - (math.isqrt(p) << 32)) & _MASK for p in _PRIMES64[:8]]
_K = [(_icbrt(p << 96) - (_icbrt(p) << 32)) & _MASK for p in _PRIMES64]


def _rotr(x: int, n: int) -> int:
    return ((x >> n) | (x << (32 - n))) & _MASK


def sha256_oracle(message: bytes) -> bytes:
    """FIPS 180-2 SHA-256, written directly from the compression schedule."""
    h = list(_H0)
    bit_len = len(message) * 8
    message += b"\x80" + b"\x00" * ((55 - len(message)) % 64) + bit_len.to_bytes(8, "big")
    for offset in range(0, len(message), 64):
        w = list(struct.unpack(">16L", message[offset:offset + 64]))
        for t in range(16, 64):
            s0 = _rotr(w[t - 15], 7) ^ _rotr(w[t - 15], 18) ^ (w[t - 15] >> 3)
            s1 = _rotr(w[t - 2], 17) ^ _rotr(w[t - 2], 19) ^ (w[t - 2] >> 10)
            w.append((w[t - 16] + s0 + w[t - 7] + s1) & _MASK)
        a, b, c, d, e, f, g, hh = h
        for t in range(64):
            big_s1 = _rotr(e, 6) ^ _rotr(e, 11) ^ _rotr(e, 25)
            ch = (e & f) ^ (~e & g)
            t1 = (hh + big_s1 + ch + _K[t] + w[t]) & _MASK
            big_s0 = _rotr(a, 2) ^ _rotr(a, 13) ^ _rotr(a, 22)
            maj = (a & b) ^ (a & c) ^ (b & c)
            t2 = (big_s0 + maj) & _MASK
            a, b, c, d, e, f, g, hh = (t1 + t2) & _MASK, a, b, c, (d + t1) & _MASK, e, f, g
        h = [(x + y) & _MASK for x, y in zip(h, (a, b, c, d, e, f, g, hh))]
    return b"".join(x.to_bytes(4, "big") for x in h)


def hmac_sha256_oracle(key: bytes, message: bytes) -> bytes:
    """Two-pass HMAC built stepwise from the pad construction."""
    if len(key) > 64:
        key = sha256_oracle(key)
    key = key + b"\x00" * (64 - len(key))
    inner = sha256_oracle(bytes(b ^ 0x36 for b in key) + message)
    return sha256_oracle(bytes(b ^ 0x5C for b in key) + inner)


def naive_pbkdf2(password: bytes, salt: bytes, iterations: int, dk_len: int) -> bytes:
    """Materialize U_1..U_c per block, XOR-reduce, concatenate, truncate."""
    blocks = []
    for i in range(1, -(-dk_len // 32) + 1):
        us = [hmac.new(password, salt + struct.pack(">L", i), hashlib.sha256).digest()]
        for _ in range(iterations - 1):
            us.append(hmac.new(password, us[-1], hashlib.sha256).digest())
        acc = [0] * 32
        for u in us:
            acc = [a ^ b for a, b in zip(acc, u)]
        blocks.append(bytes(acc))
    return b"".join(blocks)[:dk_len]


def is_prime_by_trial_division(n: int) -> bool:
    if n < 2:
        return False
    for d in range(2, math.isqrt(n) + 1):
        if n % d == 0:
            return False
    return True
