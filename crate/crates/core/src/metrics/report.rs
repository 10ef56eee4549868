use std::path::Path;

use super::evaluate::EvaluationReport;
use super::MetricsError;

pub fn write_report_json(path: &Path, reports: &[EvaluationReport]) -> Result<(), MetricsError> {
    let text = serde_json::to_string_pretty(reports).expect("reports serialize");
    std::fs::write(path, text + "\n").map_err(|e| MetricsError::Io(path.display().to_string(), e))
}

/// One CSV row per report, with a header.
pub fn write_report_csv(path: &Path, reports: &[EvaluationReport]) -> Result<(), MetricsError> {
    let io = |e: std::io::Error| MetricsError::Io(path.display().to_string(), e);
    let mut w = csv::Writer::from_path(path).map_err(|e| io(e.into()))?;
    for r in reports {
        w.serialize(r).map_err(|e| io(e.into()))?;
    }
    w.flush().map_err(io)
}

pub fn read_report_json(path: &Path) -> Result<Vec<EvaluationReport>, MetricsError> {
    let text = std::fs::read_to_string(path).map_err(|e| MetricsError::Io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| MetricsError::Io(path.display().to_string(), e.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_and_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let r = EvaluationReport {
            label: "all".into(),
            candidates: 10,
            pattern_quality: Some(0.5),
            novelty: Some(12.5),
            diversity: None,
            hit_rate: 0.8,
            generation_rate: 0.5,
            active: 10,
            aliased: 2,
            aliased_percent: 20.0,
            in_seeds: 3,
            valid: 5,
            loss: 5,
        };
        let json = dir.path().join("r.json");
        write_report_json(&json, std::slice::from_ref(&r)).unwrap();
        assert_eq!(read_report_json(&json).unwrap(), vec![r.clone()]);
        let csv_path = dir.path().join("r.csv");
        write_report_csv(&csv_path, &[r]).unwrap();
        let text = std::fs::read_to_string(csv_path).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("label,candidates,pattern_quality"));
        assert!(lines.next().unwrap().starts_with("all,10,0.5,12.5,,0.8"));
    }
}
