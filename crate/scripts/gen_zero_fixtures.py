"""Generate reference zero files for Dirichlet L-functions with mpmath.

The output uses the `ZEROS v1` text format read by `races_core::zeros::load_zeros`.
Character indices follow the canonical ordering of `CharacterGroup`: one
cyclic factor per generator, index = mixed-radix exponent vector. For prime
q the single generator is the smallest primitive root g and chi_k(g) =
exp(2*pi*i*k/(q-1)).

Usage: python3 scripts/gen_zero_fixtures.py OUTDIR
"""
import sys
import mpmath as mp

mp.mp.dps = 30


def primitive_root(p):
    phi = p - 1
    fac = [f for f in range(2, phi + 1) if phi % f == 0 and all(f % d for d in range(2, f))]
    for g in range(2, p):
        if all(pow(g, phi // f, p) != 1 for f in fac):
            return g


def character_table(q, k):
    """chi_k for prime q, or the odd real character when q == 4."""
    if q == 4:
        return [0, 1, 0, -1] if k == 1 else [0, 1, 0, 1]
    g = primitive_root(q)
    table = [mp.mpc(0)] * q
    x = 1
    for j in range(q - 1):
        table[x] = mp.expjpi(mp.mpf(2 * j * k) / (q - 1))
        x = x * g % q
    return table


def hardy_z_factory(q, chi):
    a = 0 if abs(chi[q - 1] - 1) < 1e-20 else 1
    tau = mp.fsum(chi[r] * mp.expjpi(mp.mpf(2 * r) / q) for r in range(q))
    root = tau / (mp.j ** a * mp.sqrt(q))
    half = mp.sqrt(root)  # W = half^2, Z = conj(half) * e^{i theta} L is real

    def z(t):
        s = mp.mpc(0.5, t)
        theta = t / 2 * mp.log(mp.mpf(q) / mp.pi) + mp.im(mp.loggamma((s + a) / 2))
        val = mp.conj(half) * mp.expj(theta) * mp.dirichlet(s, chi)
        return val.real

    return z


def zeros(q, k, height, step=0.02):
    chi = character_table(q, k)
    z = hardy_z_factory(q, chi)
    found = []
    t = mp.mpf(step) / 2
    prev = z(t)
    while t < height:
        nt = t + step
        cur = z(nt)
        if prev == 0 or prev * cur < 0:
            found.append(mp.findroot(z, (t, nt), solver="anderson"))
        t, prev = nt, cur
    return found


def write(path, q, k, height, gammas):
    with open(path, "w") as f:
        f.write("ZEROS v1\n")
        f.write(f"q={q} chi={k} height={height}\n")
        f.write(f"# mpmath {mp.__version__}, dps={mp.mp.dps}, scan step 0.02\n")
        for g in gammas:
            f.write(f"{mp.nstr(g, 20)} 1\n")


if __name__ == "__main__":
    out = sys.argv[1]
    jobs = [(4, 1, 60), (5, 1, 60), (5, 2, 60), (5, 3, 60)]
    for q, k, h in jobs:
        gs = zeros(q, k, h)
        write(f"{out}/q{q}_chi{k}.zeros", q, k, h, gs)
        print(q, k, len(gs), [mp.nstr(g, 10) for g in gs[:3]])
