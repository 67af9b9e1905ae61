"""Regenerate the JSON fixtures shipped in src/nctwist/data."""

import json
from pathlib import Path

from nctwist import models

OUT = Path(__file__).resolve().parents[1] / "src" / "nctwist" / "data"


def fixtures():
    ky1 = models.ToyParams(1.0, 1.0)
    ky0 = models.ToyParams(1.0, 0.0)
    yield "toy_ky1", models.build_toy(ky1)
    yield "toy_ky0", models.build_toy(ky0)
    yield "toy_ky0_even", models.build_toy(ky0, gamma=models.toy_gamma())
    yield "toy_ky1_2twist", models.build_toy(ky1, decomposition="2twist")
    yield "toy_ky1_3twist", models.build_toy(ky1, decomposition="3twist")
    yield "toy_mild_ky0", models.build_toy(ky0, [models.toy_signed_twist([1, -1, -1, 1])], gamma=models.toy_gamma())
    yield "toy_diag_twist_ky0", models.build_toy(ky0, [models.toy_diagonal_twist(2.0, 0.5)])
    yield "toy_spectrum_gap", models.build_toy(ky1, [models.toy_diagonal_twist(2.0, 0.5)])
    yield "lr_one_generation", models.build_sm_finite(models.SMParams(), algebra="A_LR")
    yield "sm_one_generation", models.build_sm_finite(models.SMParams(), algebra="A_SM")


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, t in fixtures():
        (OUT / f"{name}.json").write_text(json.dumps(models.serialize(t), separators=(",", ":")) + "\n", encoding="utf-8")
        print(name)


if __name__ == "__main__":
    main()
