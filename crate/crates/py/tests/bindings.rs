use std::ffi::CString;

use pyo3::prelude::*;
use pyo3::types::{PyDict, PyModule};

fn run_python(code: &str) {
    Python::initialize();
    Python::attach(|py| {
        let module = PyModule::new(py, "engage_bench").unwrap();
        engage_bench::register(&module).unwrap();
        py.import("sys")
            .unwrap()
            .getattr("modules")
            .unwrap()
            .set_item("engage_bench", &module)
            .unwrap();
        let globals = PyDict::new(py);
        let code = CString::new(code).unwrap();
        if let Err(e) = py.run(&code, Some(&globals), None) {
            e.print(py);
            panic!("python snippet failed");
        }
    });
}

#[test]
fn scoring_from_python() {
    run_python(
        r##"
import engage_bench as eb
w = eb.WeightConfig(time_bounds=(6.3, 8.3))
raw = eb.RawMetrics(tq_minutes=7.5, sq_percent=66, gf_percent=70, pe_percent=60, fr_percent=20,
                    rs_rating=5, if_count=8, ga_percent=40, vr_percent=90)
v = eb.compose_vector(raw, w)
assert abs(v.e_emo - 0.85) < 1e-12, v
assert abs(v.e_final - (v.e_cog + v.e_emo + v.e_beh) / 3) < 1e-12
assert eb.WeightConfig.reference().time_bounds == (0.0, 20.0)
assert eb.WeightConfig.from_json(w.to_json()).time_bounds == (6.3, 8.3)
for bad in (lambda: eb.WeightConfig(lambda_=[0.5, 0.5, 0.5]), lambda: eb.compose_vector(raw, eb.WeightConfig())):
    try:
        bad()
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")
"##,
    );
}

#[test]
fn pipeline_from_python() {
    run_python(
        r##"
import engage_bench as eb
tables = []
for c in ("trial1", "trial2", "trial3"):
    logs = eb.simulate_cohort(c, 15, 0)
    assert len(logs) == 15 and all(not l.violations() for l in logs)
    again = eb.SessionLog.from_jsonl(logs[0].to_jsonl())
    assert again.to_jsonl() == logs[0].to_jsonl()
    tables.append(eb.score_logs(logs, eb.WeightConfig.reference()))
assert len(tables[0]) == 15 and tables[0].rows[0][1] == "verbal_only"
assert eb.VectorTable.from_json(tables[0].to_json()).to_json() == tables[0].to_json()
report = eb.compare(tables)
u, p, method, significant = report.pairwise("emotional", "trial1", "trial3")
assert significant and p < 0.05 and method == "normal_approximation"
assert report.final_ordering == ["verbal_only", "verbal_gesture", "verbal_gesture_memory"]
assert len(report.to_dict()["pairwise"]) == 9
assert report.to_csv().startswith(b"# schema_version")
"##,
    );
}

#[test]
fn sessions_and_statistics_from_python() {
    run_python(
        r##"
import engage_bench as eb
log, transcript = eb.run_session("verbal_gesture_memory", "s-1", 21, "male", 3, {"interest": "chess"})
assert log.condition == "verbal_gesture_memory" and not log.violations()
assert transcript.count(b"\n") > 10 and b"chess" in transcript
assert log.raw_metrics().if_count >= 0 and 0 <= log.satisfaction() <= 1
u, p, method = eb.mann_whitney_u([1, 2], [3, 4])
assert (u, method) == (0.0, "exact") and abs(p - 1 / 3) < 1e-12
assert eb.CONDITIONS == ["verbal_only", "verbal_gesture", "verbal_memory", "verbal_gesture_memory"]
try:
    eb.simulate_cohort("trial9")
except ValueError as e:
    assert "trial9" in str(e)
else:
    raise AssertionError("expected ValueError")
"##,
    );
}

#[test]
fn reproduction_from_python() {
    run_python(
        r##"
import engage_bench as eb
r = eb.reproduce()
assert all(c["pass"] for c in r["checks"]), [c for c in r["checks"] if not c["pass"]]
assert [s["condition"] for s in r["summaries"]][:3] == ["verbal_only", "verbal_gesture", "verbal_gesture_memory"]
"##,
    );
}
