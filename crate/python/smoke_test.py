"""Smoke test for the `tsl` extension module."""

import math

import tsl


def main():
    cav = tsl.Cavity.design()
    g1, g2 = cav.g_factors
    assert abs(g1 + 0.1) < 1e-12 and abs(g2 + 0.1) < 1e-12
    assert cav.finesse == 5000.0
    assert abs(cav.beam_radius - 0.21e-3) < 1e-15

    k = cav.optical_stiffness(1.0)
    assert k[0][1] == k[1][0] > 0

    neg = tsl.Cavity.stability(True)
    fd, fc = neg.mode_frequencies(0.0)
    assert abs(fd - 0.5) < 1e-9 and abs(fc - 5.0) < 1e-9
    [(p, mode)] = neg.critical_powers(1e5)
    assert mode == "common" and abs(p / 34e3 - 1) < 0.05

    [(p, mode)] = tsl.Cavity.stability(False).critical_powers(1e5)
    assert mode == "differential" and abs(p / 0.72 - 1) < 0.10

    [(lo, hi)] = cav.dominance_band()
    assert 65 < lo < 260 and 300 < hi < 1200
    assert cav.dominance_band(power=0.014) == []

    freqs, labels, sources, total, qrpn = cav.noise_budget(10.0, 1e4, 50)
    assert len(labels) == len(sources) == 6
    assert all(len(s) == len(freqs) for s in sources)
    i = len(freqs) // 2
    assert math.isclose(total[i], math.sqrt(sum(s[i] ** 2 for s in sources)), rel_tol=1e-12)

    fs = [0.2 * 100 ** (n / 199) for n in range(200)]
    h = [tsl.model_response(2.0, 0.05, 1.0, f) for f in fs]
    (f0, zeta, gain), sigma, _ = tsl.fit(fs, [z[0] for z in h], [z[1] for z in h])
    assert abs(f0 / 2.0 - 1) < 1e-6 and abs(zeta / 0.05 - 1) < 1e-6 and abs(gain - 1) < 1e-6

    again = tsl.Cavity(cav.serialize())
    assert again.serialize() == cav.serialize()

    try:
        tsl.Cavity("[cavity]\nlength = 110\n")
    except ValueError as e:
        assert "cavity.length" in str(e)
    else:
        raise AssertionError("missing unit accepted")

    print("smoke test passed:", repr(cav))


if __name__ == "__main__":
    main()
