"""Smoke test for the engage_bench extension module.

Builds the extension with cargo when it is not importable yet, then runs a
short simulate, score and compare pipeline.

    python3 python/smoke_test.py
"""

import importlib
import shutil
import subprocess
import sys
import sysconfig
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_module():
    try:
        return importlib.import_module("engage_bench")
    except ImportError:
        pass
    subprocess.run(
        ["cargo", "build", "--release", "-p", "engage-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    suffix = ".dylib" if sys.platform == "darwin" else ".so"
    built = ROOT / "target" / "release" / f"libengage_bench{suffix}"
    staging = Path(tempfile.mkdtemp(prefix="engage_bench_"))
    shutil.copy(built, staging / f"engage_bench{sysconfig.get_config_var('EXT_SUFFIX')}")
    sys.path.insert(0, str(staging))
    return importlib.import_module("engage_bench")


def main():
    eb = load_module()

    weights = eb.WeightConfig.reference()
    raw = eb.RawMetrics(
        tq_minutes=7.5, sq_percent=66, gf_percent=70, pe_percent=60, fr_percent=20,
        rs_rating=5, if_count=8, ga_percent=40, vr_percent=90,
    )
    vector = eb.compose_vector(raw, weights)
    assert 0 <= vector.e_final <= 1
    print(vector)

    tables = []
    for condition in ("trial1", "trial2", "trial3"):
        logs = eb.simulate_cohort(condition, 15, 0)
        assert all(not log.violations() for log in logs)
        tables.append(eb.score_logs(logs, weights))
    report = eb.compare(tables)
    print("final ordering:", " < ".join(report.final_ordering))
    for component in ("cognitive", "emotional", "behavioral"):
        u, p, method, significant = report.pairwise(component, "trial1", "trial3")
        print(f"{component:<10} trial1 vs trial3  U={u:g}  p={p:.4g}  ({method})")

    u, p, method = eb.mann_whitney_u([1.0, 2.0], [3.0, 4.0])
    assert method == "exact" and abs(p - 1 / 3) < 1e-12

    print("ok")


if __name__ == "__main__":
    main()
