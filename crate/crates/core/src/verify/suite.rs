use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use super::checks::Checker;
use super::config::{CheckId, VerifyConfig};
use super::report::{CheckReport, SuiteReport};
use crate::error::Result;
use crate::functional::generate_corpus;

/// Runs the enabled checks (each once, in check-id order) over the configured corpus.
pub fn run_checks(cfg: &VerifyConfig) -> Result<Vec<CheckReport>> {
    cfg.validate()?;
    let corpus = generate_corpus(&cfg.corpus_spec())?;
    let mut ids = cfg.checks.clone();
    ids.sort();
    ids.dedup();
    let mut checker = Checker::new(cfg, &corpus);
    Ok(ids.into_iter().map(|id: CheckId| checker.run(id)).collect())
}

pub fn run_suite(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let checks = run_checks(cfg)?;
    let now = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    Ok(SuiteReport::new(cfg.clone(), checks, now))
}

/// Writes `report.json` and `summary.csv` into `dir`, creating it if needed.
pub fn write_reports(report: &SuiteReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.json"), report.to_json_pretty())?;
    fs::write(dir.join("summary.csv"), report.summary_csv())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{exit, Status};

    fn small() -> VerifyConfig {
        let mut cfg = VerifyConfig::default();
        cfg.corpus.count = 6;
        cfg.corpus.dims = vec![1];
        cfg.corpus.degree = (1, 3);
        cfg.grids.q = vec![2.0];
        cfg.checks = vec![CheckId::Poincare, CheckId::ChaosIdentity, CheckId::Poincare];
        cfg
    }

    #[test]
    fn poincare_only_run_has_saturation_row() {
        let r = run_suite(&small()).unwrap();
        assert_eq!(r.checks.iter().map(|c| c.check).collect::<Vec<_>>(), vec![CheckId::ChaosIdentity, CheckId::Poincare]);
        let p = r.check(CheckId::Poincare).unwrap();
        let sat = p.rows_with("saturation").next().unwrap();
        assert_eq!(sat.case_id, "witness-x1");
        assert_eq!(sat.status, Status::Pass);
        assert!((sat.lhs.unwrap() - 1.0).abs() <= 1e-9);
        assert_eq!(r.exit_code, exit::PASS);
        let ids: Vec<&str> = p.rows.iter().map(|r| r.case_id.as_str()).collect();
        assert!(ids.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn reports_are_written_and_hash_is_stable() {
        let cfg = small();
        let a = run_suite(&cfg).unwrap();
        let b = run_suite(&cfg).unwrap();
        assert_eq!(a.canonical_sha256, b.canonical_sha256);
        let dir = std::env::temp_dir().join(format!("gm-suite-{}", std::process::id()));
        write_reports(&a, &dir).unwrap();
        let back = SuiteReport::from_json_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
        assert_eq!(back.canonical_hash(), a.canonical_sha256);
        assert!(fs::read_to_string(dir.join("summary.csv")).unwrap().starts_with("check,relation"));
        fs::remove_dir_all(dir).unwrap();
    }
}
