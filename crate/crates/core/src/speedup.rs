//! Timing harness comparing direct convolution against the FFT-dual pipeline.
//!
//! Each template builds a convolutional graph whose query needs evidence on
//! the variables shared between factors, so the direct path convolves full
//! factor tables while the dual path multiplies transformed ones.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{Assignment, Semantics, VarId, Variable};
use crate::error::{Error, Result};
use crate::graph::{FactorGraph, NamedFactor};
use crate::inference::{answer, fft_query, Method, Query};
use crate::random::random_factor;

/// Agreement required between the two paths before anything is timed.
pub const CROSS_CHECK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Template {
    /// `f_j(x_j, x_{j+1})`; evidence on the interior, endpoints summed out.
    Chain,
    /// `f_j(c, x_j)`; evidence on the hub `c`, leaves summed out.
    Star,
}

impl FromStr for Template {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "chain" => Ok(Template::Chain),
            "star" => Ok(Template::Star),
            other => Err(format!("unknown template `{other}`")),
        }
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Template::Chain => "chain",
            Template::Star => "star",
        })
    }
}

#[derive(Debug, Clone)]
pub struct BenchInstance {
    pub graph: FactorGraph,
    pub query: Query,
}

/// Random positive instance with `factors` pairwise factors over domains of size `a`.
pub fn bench_instance<R: Rng + ?Sized>(
    rng: &mut R,
    template: Template,
    factors: usize,
    a: usize,
) -> BenchInstance {
    let factors = factors.max(1);
    let nv = factors + 1;
    let variables: Vec<Variable> = (0..nv)
        .map(|i| Variable::new(i as u32, format!("x{}", i + 1), a).expect("a >= 1"))
        .collect();
    let pair = |j: usize| match template {
        Template::Chain => (j, j + 1),
        Template::Star => (0, j + 1),
    };
    let nfs = (0..factors)
        .map(|j| {
            let (p, q) = pair(j);
            let f = random_factor(rng, &[(VarId(p as u32), a), (VarId(q as u32), a)], 0.1, 1.0);
            NamedFactor::new(
                format!("f{}", j + 1),
                f.normalize().expect("positive table"),
            )
        })
        .collect();
    let graph = FactorGraph::new(Semantics::Convolutional, variables, nfs)
        .expect("template graph is valid");
    let (marginalize, observed): (Vec<usize>, Vec<usize>) = match template {
        Template::Chain => (vec![0, nv - 1], (1..nv - 1).collect()),
        Template::Star => ((1..nv).collect(), vec![0]),
    };
    let evidence: Assignment = observed
        .into_iter()
        .map(|i| (VarId(i as u32), rng.random_range(0..a)))
        .collect();
    let query = Query::new(
        marginalize.into_iter().map(|i| VarId(i as u32)).collect(),
        evidence,
    );
    BenchInstance { graph, query }
}

/// Direct path: marginalization push-down plus convolve-then-evaluate elimination.
pub fn solve_direct(inst: &BenchInstance) -> Result<crate::algebra::Factor> {
    answer(&inst.graph, &inst.query, Method::Elimination, 0)
}

pub fn solve_fft(inst: &BenchInstance) -> Result<crate::algebra::Factor> {
    fft_query(&inst.graph, &inst.query)
}

/// Median seconds per call over `reps` measurements; short calls are
/// repeated inside each measurement until it spans a few milliseconds.
pub fn time_median(reps: usize, mut run: impl FnMut()) -> f64 {
    let start = Instant::now();
    run();
    let once = start.elapsed().as_secs_f64().max(1e-9);
    let inner = ((5e-3 / once).ceil() as usize).clamp(1, 100_000);
    let mut samples: Vec<f64> = (0..reps.max(1))
        .map(|_| {
            let t = Instant::now();
            for _ in 0..inner {
                run();
            }
            t.elapsed().as_secs_f64() / inner as f64
        })
        .collect();
    samples.sort_by(f64::total_cmp);
    samples[samples.len() / 2]
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    #[serde(rename = "A")]
    pub a: usize,
    pub t_direct: f64,
    pub t_fft: f64,
    pub ratio: f64,
    /// `A / log2 A`, the predicted saving per convolution.
    pub predicted: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub template: Template,
    pub factors: usize,
    pub repetitions: usize,
    pub rows: Vec<BenchRow>,
}

/// Runs `template` at each domain size in `sizes` (ascending). Both paths must
/// agree within [`CROSS_CHECK_TOL`] before they are timed.
pub fn run_bench(
    template: Template,
    factors: usize,
    sizes: &[usize],
    reps: usize,
    seed: u64,
) -> Result<BenchReport> {
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSpec(
            "benchmark sizes must be strictly ascending".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(sizes.len());
    for &a in sizes {
        if a == 0 {
            return Err(Error::InvalidSpec("domain size must be at least 1".into()));
        }
        let inst = bench_instance(&mut rng, template, factors, a);
        let direct = solve_direct(&inst)?;
        let fft = solve_fft(&inst)?;
        let deviation = fft.relative_linf(&direct)?;
        if deviation.is_nan() || deviation > CROSS_CHECK_TOL {
            return Err(Error::InvalidSpec(format!(
                "direct and FFT answers differ by {deviation:e} at A={a}"
            )));
        }
        let t_direct = time_median(reps, || {
            std::hint::black_box(solve_direct(&inst).expect("checked above"));
        });
        let t_fft = time_median(reps, || {
            std::hint::black_box(solve_fft(&inst).expect("checked above"));
        });
        let predicted = if a > 1 {
            a as f64 / (a as f64).log2()
        } else {
            1.0
        };
        rows.push(BenchRow {
            a,
            t_direct,
            t_fft,
            ratio: t_direct / t_fft,
            predicted,
            deviation,
        });
    }
    Ok(BenchReport {
        template,
        factors,
        repetitions: reps,
        rows,
    })
}

impl BenchReport {
    pub fn ratio_at(&self, a: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.a == a).map(|r| r.ratio)
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "template={} factors={} repetitions={}",
            self.template, self.factors, self.repetitions
        );
        let _ = writeln!(
            out,
            "{:>6} {:>12} {:>12} {:>9} {:>9}",
            "A", "t_direct", "t_fft", "ratio", "A/log2A"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>6} {:>12.3e} {:>12.3e} {:>9.2} {:>9.2}",
                r.a, r.t_direct, r.t_fft, r.ratio, r.predicted
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("A,t_direct,t_fft,ratio,predicted,deviation\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:e},{:e},{},{},{:e}",
                r.a, r.t_direct, r.t_fft, r.ratio, r.predicted, r.deviation
            );
        }
        out
    }
}
