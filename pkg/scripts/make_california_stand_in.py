"""Generate data/california_stand_in.csv, a synthetic stand-in table.

The real California housing table (20,640 rows) is not vendored here; this
script writes a 2,000-row file with the same column schema and plausible
marginals so the ``california-housing`` preset runs out of the box. Point
``problem_params.csv_path`` at the real CSV to reproduce the full-scale
experiment. Output is deterministic (fixed seed, fixed float formatting).
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

N_ROWS = 2000
SEED = 20640
COLUMNS = [
    "MedInc",
    "HouseAge",
    "AveRooms",
    "AveBedrms",
    "Population",
    "AveOccup",
    "Latitude",
    "Longitude",
    "MedHouseVal",
]


def make_table(rng: np.random.Generator) -> np.ndarray:
    n = N_ROWS
    med_inc = np.exp(rng.normal(1.1, 0.5, n)).clip(0.5, 15.0)
    house_age = rng.integers(1, 53, n).astype(float)
    ave_rooms = (3.5 + 1.6 * rng.gamma(2.0, 0.8, n)).clip(1.0, 40.0)
    ave_bedrms = (ave_rooms * rng.uniform(0.15, 0.3, n)).clip(0.5, 10.0)
    population = np.exp(rng.normal(7.0, 0.7, n)).clip(10, 30000).round()
    ave_occup = (1.5 + rng.gamma(2.0, 0.8, n)).clip(1.0, 20.0)
    latitude = rng.uniform(32.5, 42.0, n).round(2)
    longitude = rng.uniform(-124.3, -114.3, n).round(2)

    # Target: income-driven with coastal and age effects plus noise, capped
    # like the real data.
    coast = (longitude < -121.0) | (latitude < 34.5)
    value = (
        0.55 * med_inc
        + 0.012 * house_age
        + 0.06 * ave_rooms
        - 0.12 * ave_occup
        + 0.45 * coast
        + rng.normal(0.0, 0.35, n)
    ).clip(0.15, 5.0)

    return np.column_stack(
        [
            med_inc,
            house_age,
            ave_rooms,
            ave_bedrms,
            population,
            ave_occup,
            latitude,
            longitude,
            value,
        ]
    )


def main() -> None:
    out = Path(__file__).resolve().parent.parent / "data" / "california_stand_in.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    table = make_table(np.random.default_rng(SEED))
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(COLUMNS)
        for row in table:
            writer.writerow([f"{v:.6g}" for v in row])
    print(f"wrote {out} ({table.shape[0]} rows)")


if __name__ == "__main__":
    main()
