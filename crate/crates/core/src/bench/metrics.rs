use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{BenchError, Outcome};

/// Fraction of successful episodes.
pub fn success_rate<T: Outcome>(results: &[T]) -> Result<f64, BenchError> {
    if results.is_empty() {
        return Err(BenchError::Empty);
    }
    Ok(results.iter().filter(|r| r.success()).count() as f64 / results.len() as f64)
}

/// Success weighted by path length: `(1/n)·Σ success·l / max(p, l)`.
///
/// A failed episode that could not be run has no shortest path (NaN) and scores 0.
pub fn spl<T: Outcome>(results: &[T]) -> Result<f64, BenchError> {
    if results.is_empty() {
        return Err(BenchError::Empty);
    }
    let mut sum = 0.0;
    for r in results {
        let l = r.shortest_path_length();
        if l <= 0.0 || (r.success() && !l.is_finite()) {
            return Err(BenchError::NonpositiveShortest {
                episode_id: r.episode_id().to_string(),
                value: l,
            });
        }
        if r.success() {
            sum += l / r.agent_path_length().max(l);
        }
    }
    Ok(sum / results.len() as f64)
}

/// Pearson correlation of paired binary outcomes.
///
/// If either vector is constant the coefficient is undefined; it is then 1.0 for
/// element-wise equal vectors and 0.0 otherwise.
pub fn srcc(a: &[bool], b: &[bool]) -> Result<f64, BenchError> {
    if a.len() != b.len() {
        return Err(BenchError::LengthMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    if a.is_empty() {
        return Err(BenchError::Empty);
    }
    let n = a.len() as f64;
    let ones = |v: &[bool]| v.iter().filter(|&&x| x).count() as f64;
    let (na, nb) = (ones(a), ones(b));
    let both = a.iter().zip(b).filter(|(&x, &y)| x && y).count() as f64;
    let var = na * (n - na) * nb * (n - nb);
    if var == 0.0 {
        return Ok(if a == b { 1.0 } else { 0.0 });
    }
    Ok((n * both - na * nb) / var.sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupMetrics {
    pub n: usize,
    pub successes: usize,
    pub sr: f64,
    pub spl: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n: usize,
    pub sr: f64,
    pub spl: f64,
    pub by_home: BTreeMap<String, GroupMetrics>,
    pub by_goal: BTreeMap<String, GroupMetrics>,
}

fn group<T: Outcome>(results: &[&T]) -> Result<GroupMetrics, BenchError> {
    Ok(GroupMetrics {
        n: results.len(),
        successes: results.iter().filter(|r| r.success()).count(),
        sr: success_rate(results)?,
        spl: spl(results)?,
    })
}

/// SR and SPL overall, per home and per goal category.
pub fn metrics_report<T: Outcome>(results: &[T]) -> Result<MetricsReport, BenchError> {
    let mut homes: BTreeMap<String, Vec<&T>> = BTreeMap::new();
    let mut goals: BTreeMap<String, Vec<&T>> = BTreeMap::new();
    for r in results {
        homes.entry(r.home().to_string()).or_default().push(r);
        goals
            .entry(r.goal().name().to_string())
            .or_default()
            .push(r);
    }
    let table =
        |m: BTreeMap<String, Vec<&T>>| -> Result<BTreeMap<String, GroupMetrics>, BenchError> {
            m.into_iter().map(|(k, v)| Ok((k, group(&v)?))).collect()
        };
    Ok(MetricsReport {
        n: results.len(),
        sr: success_rate(results)?,
        spl: spl(results)?,
        by_home: table(homes)?,
        by_goal: table(goals)?,
    })
}

/// Paired metrics of two runs over the same episodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairedReport {
    pub n: usize,
    pub sr_a: f64,
    pub sr_b: f64,
    pub spl_a: f64,
    pub spl_b: f64,
    pub srcc: f64,
}

/// Pairs two result sets by episode id and reports both sides plus SRCC.
pub fn paired_report<T: Outcome>(a: &[T], b: &[T]) -> Result<PairedReport, BenchError> {
    let index = |v: &[T]| -> Result<HashMap<String, usize>, BenchError> {
        let mut m = HashMap::new();
        for (i, r) in v.iter().enumerate() {
            if m.insert(r.episode_id().to_string(), i).is_some() {
                return Err(BenchError::DuplicateEpisode(r.episode_id().to_string()));
            }
        }
        Ok(m)
    };
    let (ia, ib) = (index(a)?, index(b)?);
    let ka: BTreeSet<&String> = ia.keys().collect();
    let kb: BTreeSet<&String> = ib.keys().collect();
    let missing: Vec<String> = ka
        .symmetric_difference(&kb)
        .map(|s| s.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(BenchError::Unpaired(missing));
    }
    let ids: Vec<&String> = ka.into_iter().collect();
    let oa: Vec<bool> = ids.iter().map(|id| a[ia[*id]].success()).collect();
    let ob: Vec<bool> = ids.iter().map(|id| b[ib[*id]].success()).collect();
    Ok(PairedReport {
        n: ids.len(),
        sr_a: success_rate(a)?,
        sr_b: success_rate(b)?,
        spl_a: spl(a)?,
        spl_b: spl(b)?,
        srcc: srcc(&oa, &ob)?,
    })
}
