"""Smoke test for the shapiro_py extension module.

Build the module first, then run this script:

    cargo build -p shapiro-py
    python3 python/smoke_test.py

The script copies the built cdylib next to itself under the importable name,
so no install step is needed.
"""

import cmath
import json
import math
import pathlib
import shutil
import sys

ROOT = pathlib.Path(__file__).resolve().parents[1]


def load_module():
    built = None
    for profile in ("release", "debug"):
        cand = ROOT / "target" / profile / "libshapiro_py.so"
        if cand.exists() and (built is None or cand.stat().st_mtime > built.stat().st_mtime):
            built = cand
    if built is None:
        sys.exit("extension not found; run: cargo build -p shapiro-py")
    dest = pathlib.Path(__file__).parent / "shapiro_py.so"
    if not dest.exists() or built.stat().st_mtime > dest.stat().st_mtime:
        shutil.copy2(built, dest)
    sys.path.insert(0, str(dest.parent))
    import shapiro_py

    return shapiro_py


def main():
    sp = load_module()
    checks = 0

    # Scalar special functions against the standard library.
    assert abs(sp.log_gamma(5 + 0j) - math.lgamma(5.0)) < 1e-12
    z = 0.7 + 0.3j
    lhs = sp.g_of_h(z) * sp.g_of_h(z + 1j)
    assert abs(lhs - (2 * z + 1j)) < 1e-12, lhs
    assert sp.ladder_coefficient(0.0, 1.3) == 1.0 + 0.0j
    boundary = sp.ladder_coefficient_continued(1j, 2.0)
    expected = 2.0 * cmath.sqrt(2.0 * (2.0 - 1j))
    assert abs(boundary - expected) < 1e-12, boundary
    assert sp.mellin_barnes_residual(1.6, 0.8) < 1e-6
    checks += 5

    # Plane wave: q equals omega at the apex, so the value there is
    # omega^(-1 + i rho); pairing is positive on the past section.
    assert abs(sp.plane_wave_value(1.0, [0.0, 0.0, 1.0], 0.7, [0.0, 0.0, 0.0]) - 1.0) < 1e-14
    apex = sp.plane_wave_value(1.5, [0.0, 0.0, 1.0], 0.7, [0.0, 0.0, 0.0])
    assert abs(abs(apex) - 1.0 / 1.5) < 1e-14
    assert sp.pairing([0.3, -0.2, 1.1], 1.5, [0.0, 0.0, 1.0]) > 0.0
    checks += 2

    # Verification suites return full JSON reports.
    classical = json.loads(sp.classical_report(seed=42))
    assert classical["pass"] is True
    assert len(classical["rows"]) == 8
    quantum = json.loads(
        sp.quantum_report(
            seed=42,
            rho_grid=[-3.0, -1.0, 0.5, 2.0],
            quad={"spherical_degree": 11, "radial_order": 60},
        )
    )
    assert quantum["pass"] is True
    assert any("restricted to 4" in note for note in quantum["notes"])
    failing = json.loads(sp.classical_report(seed=42, tolerances={"structure": 1e-300}))
    assert failing["pass"] is False
    checks += 3

    # Transform: forward spectrum, csv round-trip, reconstruction, norms.
    small = {
        "spherical_degree": 11,
        "radial_order": 48,
        "rho_max": 12.0,
        "rho_count": 121,
    }
    spec, warnings = sp.forward("gaussian", [1.0], quad=small)
    assert not warnings, warnings
    rho = spec.rho()
    assert len(rho) == 121 and rho[0] == -12.0 and rho[-1] == 12.0
    assert spec.node_count() > 0
    reloaded = sp.Spectrum.from_csv(spec.to_csv())
    assert reloaded.to_csv() == spec.to_csv()
    center, _ = spec.inverse_at([0.0, 0.0, 0.0])
    assert abs(center - 1.0) < 5e-2, center
    direct = spec.value(0, 60)
    again = reloaded.value(0, 60)
    assert direct == again
    checks += 6

    err, _ = sp.roundtrip_error("gaussian", [1.0])
    assert err < 1e-2, err
    (lhs, rhs, ratio), _ = sp.plancherel("gaussian", [1.0], quad=small)
    assert lhs > 0.0 and rhs > 0.0
    assert abs(ratio - 1.0) < 1e-2, ratio
    checks += 2

    print(f"smoke test passed ({checks} check groups)")


if __name__ == "__main__":
    main()
