"""Self-contained BLS12-381 arithmetic: G1, G2, Fp12 and the ate pairing.

Everything here is plain-integer arithmetic, kept independent from the
scheme layer.  Fp12 is represented flat as six Fp2 coefficients over the
basis 1, w, ..., w^5 with w^6 = xi = 1 + u, which keeps the tower code
short and makes the sparse line multiplications in the Miller loop easy
to express.

The final exponentiation uses the cyclotomic chain for the exponent
3*(p^4 - p^2 + 1)/r, i.e. the pairing computed here is the cube of the
textbook ate pairing.  gcd(3, r) = 1, so it is still a non-degenerate
bilinear map; all consumers only ever use the pairing through this
module, so the scaling is invisible.

No constant-time guarantees: this backend targets correctness and
desk-scale benchmarks, not production key material.
"""

from __future__ import annotations

# Field characteristic, subgroup order and the BLS parameter x
# (p and r satisfy r = x^4 - x^2 + 1, p = (x-1)^2 * r / 3 + x).
P = 0x1A0111EA397FE69A4B1BA7B6434BACD764774B84F38512BF6730D2A0F6B0F6241EABFFFEB153FFFFB9FEFFFFFFFFAAAB
R = 0x73EDA753299D7D483339D80809A1D80553BDA402FFFE5BFEFFFFFFFF00000001
X_PARAM = -0xD201000000010000
_ABS_X = -X_PARAM

B1 = 4              # G1: y^2 = x^3 + 4
B2 = (4, 4)         # twist: y^2 = x^3 + 4*(1 + u)

G1_GEN = (
    0x17F1D3A73197D7942695638C4FA9AC0FC3688C4F9774B905A14E3A3F171BAC586C55E83FF97A1AEFFB3AF00ADB22C6BB,
    0x08B3F481E3AAA0F1A09E30ED741D8AE4FCF5E095D5D00AF600DB18CB2C04B3EDD03CC744A2888AE40CAA232946C5E7E1,
)
G2_GEN = (
    (
        0x024AA2B2F08F0A91260805272DC51051C6E47AD4FA403B02B4510B647AE3D1770BAC0326A805BBEFD48056C8C121BDB8,
        0x13E02B6052719F607DACD3A088274F65596BD0D09920B61AB5DA61BBDC7F5049334CF11213945D57E5AC7D055D042B7E,
    ),
    (
        0x0CE5D527727D6E118CC9CDC6DA2E351AADFD9BAA8CBDD3A76D429A695160D12C923AC9CC3BACA289E193548608B82801,
        0x0606C4A02EA734CC32ACD2B02BC28B99CB3E287E85A763AF267492AB572E99AB3F370D275CEC1DA1AAA9075FF05F79BE,
    ),
)

FP_BYTES = 48

# ----------------------------------------------------------------------
# Fp2 = Fp[u] / (u^2 + 1), elements as (real, imag) int pairs
# ----------------------------------------------------------------------

F2_ZERO = (0, 0)
F2_ONE = (1, 0)
XI = (1, 1)


def f2_add(a, b):
    return ((a[0] + b[0]) % P, (a[1] + b[1]) % P)


def f2_sub(a, b):
    return ((a[0] - b[0]) % P, (a[1] - b[1]) % P)


def f2_neg(a):
    return (-a[0] % P, -a[1] % P)


def f2_mul(a, b):
    a0, a1 = a
    b0, b1 = b
    t0 = a0 * b0
    t1 = a1 * b1
    return ((t0 - t1) % P, ((a0 + a1) * (b0 + b1) - t0 - t1) % P)


def f2_sqr(a):
    a0, a1 = a
    return ((a0 + a1) * (a0 - a1) % P, 2 * a0 * a1 % P)


def f2_smul(a, k):
    return (a[0] * k % P, a[1] * k % P)


def f2_mul_xi(a):
    # multiply by xi = 1 + u
    return ((a[0] - a[1]) % P, (a[0] + a[1]) % P)


def f2_conj(a):
    return (a[0], -a[1] % P)


def f2_inv(a):
    a0, a1 = a
    d = pow(a0 * a0 + a1 * a1, -1, P)
    return (a0 * d % P, -a1 * d % P)


def f2_pow(a, k):
    result = F2_ONE
    for i in range(k.bit_length() - 1, -1, -1):
        result = f2_sqr(result)
        if (k >> i) & 1:
            result = f2_mul(result, a)
    return result


# ----------------------------------------------------------------------
# Fp12 = Fp2[w] / (w^6 - xi), elements as 6-tuples of Fp2 coefficients
# ----------------------------------------------------------------------

F12_ONE = (F2_ONE, F2_ZERO, F2_ZERO, F2_ZERO, F2_ZERO, F2_ZERO)


def f12_mul(a, b):
    acc = [F2_ZERO] * 6
    for j in range(6):
        bj = b[j]
        if bj == F2_ZERO:
            continue
        for i in range(6):
            ai = a[i]
            if ai == F2_ZERO:
                continue
            t = f2_mul(ai, bj)
            k = i + j
            if k >= 6:
                t = f2_mul_xi(t)
                k -= 6
            acc[k] = f2_add(acc[k], t)
    return tuple(acc)


def f12_sqr(a):
    acc = [F2_ZERO] * 6
    for i in range(6):
        ai = a[i]
        if ai == F2_ZERO:
            continue
        t = f2_sqr(ai)
        k = 2 * i
        if k >= 6:
            t = f2_mul_xi(t)
            k -= 6
        acc[k] = f2_add(acc[k], t)
        for j in range(i + 1, 6):
            aj = a[j]
            if aj == F2_ZERO:
                continue
            t = f2_mul(ai, aj)
            t = f2_add(t, t)
            k = i + j
            if k >= 6:
                t = f2_mul_xi(t)
                k -= 6
            acc[k] = f2_add(acc[k], t)
    return tuple(acc)


def f12_conj(a):
    # p^6-power Frobenius: w -> -w
    return (a[0], f2_neg(a[1]), a[2], f2_neg(a[3]), a[4], f2_neg(a[5]))


# Frobenius constants gamma1[i] = xi^(i*(p-1)/6), gamma2[i] = xi^(i*(p^2-1)/6).
_GAMMA1 = tuple(f2_pow(XI, i * ((P - 1) // 6)) for i in range(6))
_GAMMA2 = tuple(f2_pow(XI, i * ((P * P - 1) // 6)) for i in range(6))


def f12_frobenius(a):
    return tuple(f2_mul(f2_conj(a[i]), _GAMMA1[i]) for i in range(6))


def f12_frobenius2(a):
    return tuple(f2_mul(a[i], _GAMMA2[i]) for i in range(6))


def f12_inv(a):
    # Inverse via the Galois norm down to Fp2: the product of all six
    # p^2-power conjugates lands in Fp2.
    g = None
    t = a
    for _ in range(5):
        t = f12_frobenius2(t)
        g = t if g is None else f12_mul(g, t)
    n = f12_mul(a, g)
    n0i = f2_inv(n[0])
    return tuple(f2_mul(ci, n0i) for ci in g)


def f12_is_cyclotomic(a):
    """True iff a^(p^6 + 1) = 1, i.e. the conjugate is the inverse.

    Pairing outputs and their powers all live in this subgroup; the check
    lets exponentiation pick the cheaper squaring safely.
    """
    return f12_mul(a, f12_conj(a)) == F12_ONE


def _f4_sqr(a, b):
    # squaring in Fp4 = Fp2[y]/(y^2 - xi): (a + by)^2
    a2 = f2_sqr(a)
    b2 = f2_sqr(b)
    t = f2_sqr(f2_add(a, b))
    return (f2_add(f2_mul_xi(b2), a2), f2_sub(t, f2_add(a2, b2)))


def f12_cyclo_sqr(a):
    """Granger-Scott squaring, valid only in the cyclotomic subgroup.

    Coefficients pair up into three Fp4 planes: (a0, a3), (a1, a4) and
    (a2, a5) in the flat w-power basis.
    """
    t3, t4 = _f4_sqr(a[0], a[3])
    t5, t6 = _f4_sqr(a[1], a[4])
    t7, t8 = _f4_sqr(a[2], a[5])

    def shrink(t, c):
        # 3t - 2c
        return f2_sub(f2_add(t, f2_add(t, t)), f2_add(c, c))

    def grow(t, c):
        # 3t + 2c
        return f2_add(f2_add(t, f2_add(t, t)), f2_add(c, c))

    return (
        shrink(t3, a[0]),
        grow(f2_mul_xi(t8), a[1]),
        shrink(t5, a[2]),
        grow(t4, a[3]),
        shrink(t7, a[4]),
        grow(t6, a[5]),
    )


def f12_pow(a, k):
    if k < 0:
        raise ValueError("negative exponent")
    sqr = f12_cyclo_sqr if f12_is_cyclotomic(a) else f12_sqr
    result = F12_ONE
    started = False
    for i in range(k.bit_length() - 1, -1, -1):
        if started:
            result = sqr(result)
        if (k >> i) & 1:
            result = f12_mul(result, a) if started else a
            started = True
    return result if started else F12_ONE


# ----------------------------------------------------------------------
# G1: short Weierstrass over Fp, affine (x, y) with None as infinity
# ----------------------------------------------------------------------


def g1_is_on_curve(pt):
    if pt is None:
        return True
    x, y = pt
    return (y * y - (x * x * x + B1)) % P == 0


def g1_neg(pt):
    if pt is None:
        return None
    return (pt[0], -pt[1] % P)


def _g1_jac_double(pt):
    x, y, z = pt
    if not y:
        return (1, 1, 0)
    a = x * x % P
    b = y * y % P
    c = b * b % P
    d = 2 * ((x + b) * (x + b) - a - c) % P
    e = 3 * a % P
    f = e * e % P
    x3 = (f - 2 * d) % P
    y3 = (e * (d - x3) - 8 * c) % P
    z3 = 2 * y * z % P
    return (x3, y3, z3)


def _g1_jac_add(p1, p2):
    x1, y1, z1 = p1
    x2, y2, z2 = p2
    if not z1:
        return p2
    if not z2:
        return p1
    z1z1 = z1 * z1 % P
    z2z2 = z2 * z2 % P
    u1 = x1 * z2z2 % P
    u2 = x2 * z1z1 % P
    s1 = y1 * z2 * z2z2 % P
    s2 = y2 * z1 * z1z1 % P
    h = (u2 - u1) % P
    rr = 2 * (s2 - s1) % P
    if not h:
        if not rr:
            return _g1_jac_double(p1)
        return (1, 1, 0)
    i = 4 * h * h % P
    j = h * i % P
    v = u1 * i % P
    x3 = (rr * rr - j - 2 * v) % P
    y3 = (rr * (v - x3) - 2 * s1 * j) % P
    z3 = ((z1 + z2) * (z1 + z2) - z1z1 - z2z2) * h % P
    return (x3, y3, z3)


def _g1_jac_to_affine(pt):
    x, y, z = pt
    if not z:
        return None
    zi = pow(z, -1, P)
    zi2 = zi * zi % P
    return (x * zi2 % P, y * zi2 * zi % P)


def g1_add(p1, p2):
    if p1 is None:
        return p2
    if p2 is None:
        return p1
    return _g1_jac_to_affine(_g1_jac_add((*p1, 1), (*p2, 1)))


def g1_mul(pt, k):
    k %= R
    if pt is None or k == 0:
        return None
    acc = (1, 1, 0)
    base = (*pt, 1)
    for i in range(k.bit_length() - 1, -1, -1):
        acc = _g1_jac_double(acc)
        if (k >> i) & 1:
            acc = _g1_jac_add(acc, base)
    return _g1_jac_to_affine(acc)


def g1_in_subgroup(pt):
    return g1_is_on_curve(pt) and g1_mul(pt, R - 1) == g1_neg(pt)


# ----------------------------------------------------------------------
# G2: twist curve over Fp2, same layout as G1
# ----------------------------------------------------------------------


def g2_is_on_curve(pt):
    if pt is None:
        return True
    x, y = pt
    return f2_sqr(y) == f2_add(f2_mul(f2_sqr(x), x), B2)


def g2_neg(pt):
    if pt is None:
        return None
    return (pt[0], f2_neg(pt[1]))


def _g2_jac_double(pt):
    x, y, z = pt
    if y == F2_ZERO:
        return (F2_ONE, F2_ONE, F2_ZERO)
    a = f2_sqr(x)
    b = f2_sqr(y)
    c = f2_sqr(b)
    d = f2_sub(f2_sqr(f2_add(x, b)), f2_add(a, c))
    d = f2_add(d, d)
    e = f2_smul(a, 3)
    f = f2_sqr(e)
    x3 = f2_sub(f, f2_add(d, d))
    y3 = f2_sub(f2_mul(e, f2_sub(d, x3)), f2_smul(c, 8))
    z3 = f2_smul(f2_mul(y, z), 2)
    return (x3, y3, z3)


def _g2_jac_add(p1, p2):
    x1, y1, z1 = p1
    x2, y2, z2 = p2
    if z1 == F2_ZERO:
        return p2
    if z2 == F2_ZERO:
        return p1
    z1z1 = f2_sqr(z1)
    z2z2 = f2_sqr(z2)
    u1 = f2_mul(x1, z2z2)
    u2 = f2_mul(x2, z1z1)
    s1 = f2_mul(f2_mul(y1, z2), z2z2)
    s2 = f2_mul(f2_mul(y2, z1), z1z1)
    h = f2_sub(u2, u1)
    rr = f2_smul(f2_sub(s2, s1), 2)
    if h == F2_ZERO:
        if rr == F2_ZERO:
            return _g2_jac_double(p1)
        return (F2_ONE, F2_ONE, F2_ZERO)
    i = f2_smul(f2_sqr(h), 4)
    j = f2_mul(h, i)
    v = f2_mul(u1, i)
    x3 = f2_sub(f2_sub(f2_sqr(rr), j), f2_smul(v, 2))
    y3 = f2_sub(f2_mul(rr, f2_sub(v, x3)), f2_smul(f2_mul(s1, j), 2))
    z3 = f2_mul(f2_sub(f2_sqr(f2_add(z1, z2)), f2_add(z1z1, z2z2)), h)
    return (x3, y3, z3)


def _g2_jac_to_affine(pt):
    x, y, z = pt
    if z == F2_ZERO:
        return None
    zi = f2_inv(z)
    zi2 = f2_sqr(zi)
    return (f2_mul(x, zi2), f2_mul(y, f2_mul(zi2, zi)))


def g2_add(p1, p2):
    if p1 is None:
        return p2
    if p2 is None:
        return p1
    return _g2_jac_to_affine(_g2_jac_add((*p1, F2_ONE), (*p2, F2_ONE)))


def g2_mul(pt, k):
    k %= R
    if pt is None or k == 0:
        return None
    acc = (F2_ONE, F2_ONE, F2_ZERO)
    base = (*pt, F2_ONE)
    for i in range(k.bit_length() - 1, -1, -1):
        acc = _g2_jac_double(acc)
        if (k >> i) & 1:
            acc = _g2_jac_add(acc, base)
    return _g2_jac_to_affine(acc)


def g2_in_subgroup(pt):
    return g2_is_on_curve(pt) and g2_mul(pt, R - 1) == g2_neg(pt)


# ----------------------------------------------------------------------
# Ate pairing
# ----------------------------------------------------------------------
#
# Q on the twist untwists into E(Fp12) via (x, y) -> (x*w^-2, y*w^-3).
# A line with twist-slope lam through the twist point (xt, yt), scaled by
# the constant w^3 (absorbed by the final exponentiation), evaluates at
# P = (px, py) as
#     (lam*xt - yt)  +  (-lam*px) * w^2  +  py * w^3
# which is the sparse element handled by _f12_mul_line.


def _f12_mul_line(f, c0, c2, c3):
    acc = [F2_ZERO] * 6
    for i in range(6):
        fi = f[i]
        if fi == F2_ZERO:
            continue
        for j, c in ((0, c0), (2, c2), (3, c3)):
            if c == F2_ZERO:
                continue
            t = f2_mul(fi, c)
            k = i + j
            if k >= 6:
                t = f2_mul_xi(t)
                k -= 6
            acc[k] = f2_add(acc[k], t)
    return tuple(acc)


def miller_loop(p1, q2):
    px, py = p1
    qx, qy = q2
    neg_px = -px % P
    c3 = (py, 0)
    tx, ty = qx, qy
    f = F12_ONE
    for i in range(_ABS_X.bit_length() - 2, -1, -1):
        # doubling step
        lam = f2_mul(f2_smul(f2_sqr(tx), 3), f2_inv(f2_smul(ty, 2)))
        c0 = f2_sub(f2_mul(lam, tx), ty)
        f = _f12_mul_line(f12_sqr(f), c0, f2_smul(lam, neg_px), c3)
        nx = f2_sub(f2_sqr(lam), f2_smul(tx, 2))
        ty = f2_sub(f2_mul(lam, f2_sub(tx, nx)), ty)
        tx = nx
        if (_ABS_X >> i) & 1:
            # addition step with the base point
            lam = f2_mul(f2_sub(ty, qy), f2_inv(f2_sub(tx, qx)))
            c0 = f2_sub(f2_mul(lam, qx), qy)
            f = _f12_mul_line(f, c0, f2_smul(lam, neg_px), c3)
            nx = f2_sub(f2_sub(f2_sqr(lam), tx), qx)
            ty = f2_sub(f2_mul(lam, f2_sub(tx, nx)), ty)
            tx = nx
    # x < 0: invert, which the final exponentiation turns into conjugation
    return f12_conj(f)


def _pow_abs_x(f):
    # callers guarantee f is cyclotomic (post-easy-part values)
    r = f
    for i in range(_ABS_X.bit_length() - 2, -1, -1):
        r = f12_cyclo_sqr(r)
        if (_ABS_X >> i) & 1:
            r = f12_mul(r, f)
    return r


def _pow_x(f):
    # f^x for cyclotomic f (x negative, so inverse = conjugate)
    return f12_conj(_pow_abs_x(f))


def final_exponentiation(f):
    # easy part: f^((p^6 - 1)(p^2 + 1))
    t = f12_mul(f12_conj(f), f12_inv(f))
    t = f12_mul(f12_frobenius2(t), t)
    # hard part, exponent 3*(p^4 - p^2 + 1)/r = (x-1)^2 (x+p)(x^2+p^2-1) + 3
    a = f12_mul(_pow_x(t), f12_conj(t))
    b = f12_mul(_pow_x(a), f12_conj(a))
    c = f12_mul(_pow_x(b), f12_frobenius(b))
    d = f12_mul(f12_mul(_pow_x(_pow_x(c)), f12_frobenius2(c)), f12_conj(c))
    return f12_mul(d, f12_mul(f12_sqr(t), t))


def pairing(p1, q2):
    """Ate pairing of a G1 point and a twist (G2) point, both affine."""
    if p1 is None or q2 is None:
        return F12_ONE
    return final_exponentiation(miller_loop(p1, q2))


# ----------------------------------------------------------------------
# Canonical byte encodings (uncompressed, big-endian, reduced mod p)
# ----------------------------------------------------------------------

G1_BYTES = 1 + 2 * FP_BYTES
G2_BYTES = 1 + 4 * FP_BYTES
F12_BYTES = 12 * FP_BYTES


def _fp_to_bytes(v):
    return v.to_bytes(FP_BYTES, "big")


def _fp_from_bytes(data):
    v = int.from_bytes(data, "big")
    if v >= P:
        raise ValueError("field element out of range")
    return v


def g1_to_bytes(pt):
    if pt is None:
        return b"\x00" + bytes(2 * FP_BYTES)
    return b"\x01" + _fp_to_bytes(pt[0]) + _fp_to_bytes(pt[1])


def g1_from_bytes(data):
    if len(data) != G1_BYTES or data[0] not in (0, 1):
        raise ValueError("bad G1 encoding")
    if data[0] == 0:
        if any(data[1:]):
            raise ValueError("bad G1 infinity encoding")
        return None
    pt = (_fp_from_bytes(data[1:49]), _fp_from_bytes(data[49:]))
    if not g1_in_subgroup(pt):
        raise ValueError("G1 point not in the prime-order subgroup")
    return pt


def g2_to_bytes(pt):
    if pt is None:
        return b"\x00" + bytes(4 * FP_BYTES)
    (x0, x1), (y0, y1) = pt
    return b"\x01" + b"".join(_fp_to_bytes(v) for v in (x0, x1, y0, y1))


def g2_from_bytes(data):
    if len(data) != G2_BYTES or data[0] not in (0, 1):
        raise ValueError("bad G2 encoding")
    if data[0] == 0:
        if any(data[1:]):
            raise ValueError("bad G2 infinity encoding")
        return None
    v = [_fp_from_bytes(data[1 + i * 48:49 + i * 48]) for i in range(4)]
    pt = ((v[0], v[1]), (v[2], v[3]))
    if not g2_in_subgroup(pt):
        raise ValueError("G2 point not in the prime-order subgroup")
    return pt


def f12_to_bytes(f):
    return b"".join(_fp_to_bytes(c[0]) + _fp_to_bytes(c[1]) for c in f)


def f12_from_bytes(data):
    if len(data) != F12_BYTES:
        raise ValueError("bad Fp12 encoding")
    vals = [_fp_from_bytes(data[i * 48:(i + 1) * 48]) for i in range(12)]
    return tuple((vals[2 * i], vals[2 * i + 1]) for i in range(6))
