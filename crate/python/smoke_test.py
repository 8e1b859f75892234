"""Smoke test for the `hip` extension module.

Build the module first, e.g. `maturin develop -m crates/python/Cargo.toml`,
or `cargo build --release -p hip-python --features extension-module` and put
`target/release/libhip.so` on the path as `hip.so`.
"""

import math

import hip


def main():
    rows = hip.sample_hyperplanes(10.0, seed=3)
    assert rows and all(len(r) == 3 and abs(r[2]) <= 10.0 for r in rows)
    assert rows == hip.sample_hyperplanes(10.0, seed=3)

    s = math.sqrt(0.5)
    pts = hip.intersection_points([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [s, s, s]], 2.0)
    assert len(pts) == 3

    res = hip.reconstruct(7)
    assert res["terminated"] and res["T"] > 0
    assert all(abs(h[-1]) <= 1.0 for h in res["chi"])

    sc = hip.variance_scaling([2.0, 4.0, 8.0], reps=50, seed=1)
    assert len(sc["rows"]) == 3 and sc["slope"] > 0

    try:
        hip.sample_hyperplanes(-1.0, seed=0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative radius accepted")

    print(f"hip {hip.__version__}: smoke test passed ({len(rows)} lines, T = {res['T']:.3f})")


if __name__ == "__main__":
    main()
