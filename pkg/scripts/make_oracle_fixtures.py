"""Generate the frozen Monte-Carlo oracle fixtures for the test suite.

Draws 50 random planar states spanning the interesting SNR and sharpness
ranges, estimates (b1', b2') for each with 10^7 Monte-Carlo draws, and
writes tests/fixtures/oracle_cases.csv. The state parameters are encoded in
case_id so tests can re-evaluate the quadrature on the same states.

Run from the repository root:
    python3 scripts/make_oracle_fixtures.py
"""

from __future__ import annotations

import pathlib

import numpy as np

from mlr_em.geometry import PlanarState
from mlr_em.oracle import mc_population_step
from mlr_em.csvio import write_oracle_fixtures

N_CASES = 50
N_DRAWS = 10_000_000
CASE_RNG_SEED = 20260823
MC_SEED_BASE = 777_000


def make_cases(n_cases: int = N_CASES) -> list[tuple[str, PlanarState]]:
    """Deterministic battery of planar states: (case_id, state) pairs."""
    rng = np.random.default_rng(np.random.SeedSequence(CASE_RNG_SEED))
    cases = []
    for i in range(n_cases):
        sigma = float(np.exp(rng.uniform(np.log(0.2), np.log(2.0))))
        bs_norm = float(np.exp(rng.uniform(np.log(0.3), np.log(3.0))))
        theta = float(rng.uniform(0.02, np.pi / 2 - 0.02))
        b1_star = bs_norm * np.cos(theta) * (1.0 if rng.random() < 0.8 else -1.0)
        b2_star = bs_norm * np.sin(theta)
        hi = 3.0 * np.sqrt(sigma**2 + bs_norm**2)
        b1 = float(np.exp(rng.uniform(np.log(0.05), np.log(hi))))
        state = PlanarState(b1=b1, b1_star=float(b1_star),
                            b2_star=float(b2_star), sigma=sigma)
        case_id = (f"{i:02d};b1={b1!r};b1s={float(b1_star)!r};"
                   f"b2s={float(b2_star)!r};sigma={sigma!r}")
        cases.append((case_id, state))
    return cases


def parse_case_id(case_id: str) -> PlanarState:
    """Recover the PlanarState encoded in a fixture case_id."""
    parts = dict(p.split("=", 1) for p in case_id.split(";")[1:])
    return PlanarState(b1=float(parts["b1"]), b1_star=float(parts["b1s"]),
                       b2_star=float(parts["b2s"]), sigma=float(parts["sigma"]))


def main() -> None:
    out = pathlib.Path(__file__).resolve().parents[1] / "tests" / "fixtures"
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for i, (case_id, state) in enumerate(make_cases()):
        seed = MC_SEED_BASE + i
        est1, est2 = mc_population_step(state, N_DRAWS, seed)
        rows.append((case_id, "b1_prime", est1.mean, est1.std_error,
                     est1.n_draws, seed))
        rows.append((case_id, "b2_prime", est2.mean, est2.std_error,
                     est2.n_draws, seed))
        print(f"case {i:02d}: b1'={est1.mean:+.6f} (se {est1.std_error:.2e}) "
              f"b2'={est2.mean:+.6f} (se {est2.std_error:.2e})")
    write_oracle_fixtures(rows, out / "oracle_cases.csv")
    print(f"wrote {out / 'oracle_cases.csv'}")


if __name__ == "__main__":
    main()
