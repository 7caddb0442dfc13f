use std::io::Read;

use serde::Deserialize;

use super::{BenchError, Outcome};
use crate::category::Category;

/// One externally logged episode, e.g. a transcribed per-episode results table.
#[derive(Clone, Debug, PartialEq)]
pub struct TableEpisode {
    /// `{home}_{goal}`, unique within one method.
    pub episode_id: String,
    pub home: String,
    /// Goal label as logged, such as `couch2`.
    pub goal_label: String,
    pub goal: Category,
    pub method: String,
    pub shortest_path_length: f64,
    pub success: bool,
    pub spl: f64,
    pub failure: Option<String>,
    pub collisions: Option<usize>,
    pub steps: Option<usize>,
}

impl Outcome for TableEpisode {
    fn episode_id(&self) -> &str {
        &self.episode_id
    }

    fn home(&self) -> &str {
        &self.home
    }

    fn goal(&self) -> Category {
        self.goal
    }

    fn success(&self) -> bool {
        self.success
    }

    fn shortest_path_length(&self) -> f64 {
        self.shortest_path_length
    }

    /// Recovered from the logged SPL term; unknown (NaN) for failures.
    fn agent_path_length(&self) -> f64 {
        if self.success && self.spl > 0.0 {
            self.shortest_path_length / self.spl
        } else {
            f64::NAN
        }
    }
}

#[derive(Deserialize)]
struct Row {
    home: String,
    goal: String,
    shortest_path_m: f64,
    method: String,
    success: u8,
    spl: f64,
    failure: Option<String>,
    collisions: Option<usize>,
    steps: Option<usize>,
}

/// Reads a CSV with columns
/// `home,goal,shortest_path_m,method,success,spl,failure,collisions,steps`.
pub fn import_table<R: Read>(input: R, name: &str) -> Result<Vec<TableEpisode>, BenchError> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<Row>().enumerate() {
        let line = i + 2;
        let err = |message: String| BenchError::Parse {
            path: name.to_string(),
            line,
            message,
        };
        let row = row.map_err(|e| err(e.to_string()))?;
        let base = row.goal.trim_end_matches(|c: char| c.is_ascii_digit());
        let goal: Category = base
            .parse()
            .map_err(|e: crate::category::UnknownCategory| err(e.to_string()))?;
        if row.success > 1 {
            return Err(err(format!("success must be 0 or 1, got {}", row.success)));
        }
        let success = row.success == 1;
        if !(0.0..=1.0).contains(&row.spl) || (!success && row.spl != 0.0) {
            return Err(err(format!(
                "spl {} inconsistent with success {}",
                row.spl, row.success
            )));
        }
        out.push(TableEpisode {
            episode_id: format!("{}_{}", row.home, row.goal),
            home: row.home,
            goal_label: row.goal,
            goal,
            method: row.method,
            shortest_path_length: row.shortest_path_m,
            success,
            spl: row.spl,
            failure: row.failure.filter(|f| !f.is_empty()),
            collisions: row.collisions,
            steps: row.steps,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{spl, success_rate};

    const SAMPLE: &str = "home,goal,shortest_path_m,method,success,spl,failure,collisions,steps
1,couch2,3.9,classical,1,0.64,,2,51
1,bed1,5.0,classical,0,0,timeout,,
";

    #[test]
    fn recovers_agent_path_from_spl() {
        let rows = import_table(SAMPLE.as_bytes(), "t.csv").unwrap();
        assert_eq!(rows[0].goal, Category::Couch);
        assert_eq!(rows[0].episode_id, "1_couch2");
        assert!((spl(&rows[..1]).unwrap() - 0.64).abs() < 1e-12);
        assert_eq!(success_rate(&rows).unwrap(), 0.5);
        assert_eq!(rows[1].failure.as_deref(), Some("timeout"));
        assert_eq!(rows[1].steps, None);
    }

    #[test]
    fn bad_rows_name_the_line() {
        let bad = "home,goal,shortest_path_m,method,success,spl,failure,collisions,steps\n1,lamp1,2,m,1,0.5,,,\n";
        let e = import_table(bad.as_bytes(), "t.csv").unwrap_err();
        assert!(e.to_string().starts_with("t.csv:2:"), "{e}");
    }
}
