"""Brute-force references, written without the package's bit tricks."""


def v2(n):
    t = 0
    while n % 2 == 0:
        n //= 2
        t += 1
    return t


def step(n):
    m = 3 * n + 1
    q = 0
    while m % 2 == 0:
        m //= 2
        q += 1
    return m, q


def orbit(n):
    """[(value, q), ...] from odd n down to 1 (empty for n = 1)."""
    out = []
    while n != 1:
        n, q = step(n)
        out.append((n, q))
    return out


def bits(n):
    return {i for i, c in enumerate(reversed(format(n, "b"))) if c == "1"}


def deg(n):
    return len(format(n, "b")) - 1
