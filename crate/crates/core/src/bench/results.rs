use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{BenchError, GroupMetrics, MetricsReport};
use crate::agentloop::{EpisodeResult, TraceRecord};

/// One line of a results file: the episode result tagged with the config hash.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    #[serde(flatten)]
    pub result: EpisodeResult,
    pub config_hash: String,
}

/// Writes results one per line, traces omitted.
pub fn write_results<W: Write>(
    results: &[EpisodeResult],
    config_hash: &str,
    mut out: W,
) -> std::io::Result<()> {
    for r in results {
        let rec = ResultRecord {
            result: EpisodeResult {
                trace: None,
                ..r.clone()
            },
            config_hash: config_hash.to_string(),
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_results<R: BufRead>(input: R, name: &str) -> Result<Vec<ResultRecord>, BenchError> {
    read_lines(input, name)
}

/// One line of a trace file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub episode_id: String,
    pub config_hash: String,
    #[serde(flatten)]
    pub record: TraceRecord,
}

/// Writes the episode's trace, one step per line. Writes nothing without a trace.
pub fn write_trace<W: Write>(
    result: &EpisodeResult,
    config_hash: &str,
    mut out: W,
) -> std::io::Result<()> {
    for record in result.trace.iter().flatten() {
        let entry = TraceEntry {
            episode_id: result.episode_id.clone(),
            config_hash: config_hash.to_string(),
            record: record.clone(),
        };
        serde_json::to_writer(&mut out, &entry)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_trace<R: BufRead>(input: R, name: &str) -> Result<Vec<TraceEntry>, BenchError> {
    read_lines(input, name)
}

fn read_lines<T: serde::de::DeserializeOwned, R: BufRead>(
    input: R,
    name: &str,
) -> Result<Vec<T>, BenchError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| BenchError::Parse {
            path: name.to_string(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

/// Per-group table with a `key` column followed by `n,successes,sr,spl,config_hash`.
pub fn write_group_csv<W: Write>(
    key: &str,
    groups: &BTreeMap<String, GroupMetrics>,
    config_hash: &str,
    out: W,
) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([key, "n", "successes", "sr", "spl", "config_hash"])
        .map_err(csv_io)?;
    for (k, g) in groups {
        w.write_record([
            k.clone(),
            g.n.to_string(),
            g.successes.to_string(),
            format!("{:.4}", g.sr),
            format!("{:.4}", g.spl),
            config_hash.to_string(),
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> BenchError {
    BenchError::Io(e.into())
}

pub fn write_summary<W: Write>(
    report: &MetricsReport,
    config_hash: &str,
    mut out: W,
) -> std::io::Result<()> {
    #[derive(Serialize)]
    struct Summary<'a> {
        config_hash: &'a str,
        #[serde(flatten)]
        report: &'a MetricsReport,
    }
    serde_json::to_writer_pretty(
        &mut out,
        &Summary {
            config_hash,
            report,
        },
    )?;
    out.write_all(b"\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agentloop::{EpisodeSpec, FailureClass};
    use crate::bench::metrics_report;
    use crate::gridworld::Pose;
    use crate::Category;

    #[test]
    fn results_round_trip_with_null_distances() {
        let spec = EpisodeSpec::new("e1", "home", Pose::new(0.0, 0.0, 0.0), Category::Tv, 4);
        let err = EpisodeResult::errored(&spec, &"no such scene");
        let mut buf = Vec::new();
        write_results(&[err.clone()], "abc", &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("\"shortest_path_length\":null"));
        assert!(text.contains("\"config_hash\":\"abc\""));
        let back = read_results(buf.as_slice(), "r.jsonl").unwrap();
        assert_eq!(back.len(), 1);
        let r = &back[0].result;
        assert_eq!(r.failure_class, FailureClass::Error);
        assert!(r.shortest_path_length.is_nan());
        assert_eq!(r.diagnostics.error.as_deref(), Some("no such scene"));
    }

    #[test]
    fn group_csv_layout() {
        let spec = EpisodeSpec::new("e1", "home", Pose::new(0.0, 0.0, 0.0), Category::Tv, 4);
        let mut r = EpisodeResult::errored(&spec, &"x");
        r.shortest_path_length = 2.0;
        let rep = metrics_report(&[r]).unwrap();
        let mut buf = Vec::new();
        write_group_csv("goal", &rep.by_goal, "h", &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "goal,n,successes,sr,spl,config_hash\ntv,1,0,0.0000,0.0000,h\n"
        );
    }
}
