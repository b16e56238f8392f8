//! Stream replay with optional oracle comparison and invariant audits.

use std::fmt;
use std::io::{self, BufRead, Write};

use serde::Serialize;

use crate::clusterer::{Clusterer, EventKind, RecourseSummary, StepOutcome, UpdateEvent};
use crate::error::Error;
use crate::forest::{check_valid_triple, subtree_diameter_bound_check};
use crate::harness::report::{AuditReport, OracleReport, StepReport};
use crate::harness::stream::{StreamError, StreamReader};
use crate::metric::PointId;
use crate::oracle::{self, DEFAULT_ENUMERATION_CAP};
use crate::ranks::{
    check_maximality, check_separation, check_valid_tuple, has_cap_witness, opt_lower_bound,
};

/// Guaranteed bound on `cost / OPT_k` whenever `|P| > k`.
pub const APPROX_FACTOR: f64 = 24.0;
pub const MAX_INSERT_SWAPS: usize = 1;
pub const MAX_INSERT_SYM_DIFF: usize = 2;
pub const MAX_DELETE_SWAPS: usize = 2;
pub const MAX_DELETE_SYM_DIFF: usize = 4;
/// Per level, during a deletion.
pub const MAX_DOWN_CROSSINGS: usize = 1;
pub const MAX_UP_CROSSINGS: usize = 2;

const MAX_LISTED_VIOLATIONS: usize = 16;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum OracleChoice {
    Exact,
    Gonzalez,
    #[default]
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub verify: bool,
    pub oracle: OracleChoice,
    /// Audit every n-th step (with `verify`); 0 is treated as 1.
    pub audit_every: u64,
    pub enumeration_cap: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            verify: false,
            oracle: OracleChoice::None,
            audit_every: 1,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

#[derive(Debug)]
pub enum RunError {
    Io(io::Error),
    Parse {
        line: usize,
        message: String,
    },
    Precondition {
        line: usize,
        event: String,
        source: Error,
    },
    Oracle {
        step: u64,
        source: Error,
    },
    Invariant {
        line: usize,
        step: u64,
        violations: Vec<String>,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Io(_) | RunError::Oracle { .. } => 1,
            RunError::Parse { .. } => 2,
            RunError::Precondition { .. } => 3,
            RunError::Invariant { .. } => 4,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Io(e) => write!(f, "io error: {e}"),
            RunError::Parse { line, message } => write!(f, "parse error at line {line}: {message}"),
            RunError::Precondition {
                line,
                event,
                source,
            } => {
                write!(f, "line {line}: cannot apply {event}: {source}")
            }
            RunError::Oracle { step, source } => write!(f, "step {step}: oracle failed: {source}"),
            RunError::Invariant {
                line,
                step,
                violations,
            } => {
                write!(f, "line {line} (step {step}): audit failed")?;
                for v in violations {
                    write!(f, "\n  {v}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for RunError {}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(e)
    }
}

impl From<StreamError> for RunError {
    fn from(e: StreamError) -> Self {
        match e {
            StreamError::Io(e) => RunError::Io(e),
            StreamError::Parse { line, message } => RunError::Parse { line, message },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub steps: u64,
    pub audited_steps: u64,
    pub final_centers: Vec<PointId>,
    pub recourse: RecourseSummary,
}

fn note<T: fmt::Display>(
    out: &mut Vec<String>,
    tag: &str,
    items: impl IntoIterator<Item = T>,
) -> bool {
    let mut clean = true;
    for item in items {
        clean = false;
        if out.len() < MAX_LISTED_VIOLATIONS {
            out.push(format!("{tag}: {item}"));
        }
    }
    clean
}

/// Run every invariant check on the state reached by `outcome`.
pub fn audit(
    c: &Clusterer,
    kind: EventKind,
    outcome: &StepOutcome,
    cost: f64,
    oracle: Option<&OracleReport>,
) -> AuditReport {
    let u = c.universe();
    let t = c.triple();
    let (xi_g, xi_s) = (t.geometric(), t.smooth());
    let mut v = Vec::new();

    let valid_triple = note(
        &mut v,
        "triple",
        check_valid_triple(t.forest(), xi_g, xi_s, u).violations,
    );
    let separation = note(
        &mut v,
        "separation",
        check_separation(xi_g, u)
            .into_iter()
            .map(|(p, q)| format!("{p} {q}")),
    );
    let maximality = note(&mut v, "maximality", check_maximality(xi_g, u));
    let tuple = note(&mut v, "tuple", check_valid_tuple(xi_g, xi_s, u).violations);
    let cap_witness = has_cap_witness(xi_g, u.rank_cap());
    if !cap_witness {
        note(
            &mut v,
            "cap",
            [format!("no point reaches rank {}", u.rank_cap())],
        );
    }
    let smooth_churn = match kind {
        EventKind::Insert => note(
            &mut v,
            "churn",
            (!outcome.smooth.preserves_existing())
                .then(|| format!("insertion changed {}", outcome.smooth)),
        ),
        EventKind::Delete => {
            let m = outcome.smooth.max_crossings(u.rank_cap());
            note(
                &mut v,
                "churn",
                (m.down > MAX_DOWN_CROSSINGS || m.up > MAX_UP_CROSSINGS).then(|| {
                    format!(
                        "{} down / {} up at one level: {}",
                        m.down, m.up, outcome.smooth
                    )
                }),
            )
        }
    };
    let diameter = note(
        &mut v,
        "diameter",
        subtree_diameter_bound_check(t.forest(), xi_g, u).violations,
    );
    let center_rule = note(&mut v, "centers", c.check_center_rule());
    let d = &outcome.diff;
    let (max_swaps, max_sym) = match kind {
        EventKind::Insert => (MAX_INSERT_SWAPS, MAX_INSERT_SYM_DIFF),
        EventKind::Delete => (MAX_DELETE_SWAPS, MAX_DELETE_SYM_DIFF),
    };
    let recourse = note(
        &mut v,
        "recourse",
        (d.swaps > max_swaps || d.sym_diff() > max_sym)
            .then(|| format!("swaps {} sym_diff {}", d.swaps, d.sym_diff())),
    );

    let mut lower_bound = None;
    let mut ratio = None;
    if let Some(o) = oracle.filter(|_| xi_g.len() > c.k()) {
        let lb = opt_lower_bound(xi_g, c.k()).expect("k < |P|");
        lower_bound = Some(note(
            &mut v,
            "lower bound",
            (lb > o.value).then(|| format!("{lb} > {} {}", o.method, o.value)),
        ));
        ratio = Some(note(
            &mut v,
            "ratio",
            (cost > APPROX_FACTOR * o.value).then(|| format!("cost {cost} > 24 * {}", o.value)),
        ));
    }

    AuditReport {
        valid_triple,
        separation,
        maximality,
        tuple,
        cap_witness,
        smooth_churn,
        diameter,
        center_rule,
        recourse,
        lower_bound,
        ratio,
        violations: v,
    }
}

/// Oracle value for the current active set, or `None` when it is empty or
/// no oracle was requested. A Gonzalez value is at least the optimum, so a
/// ratio computed against it can only understate the true ratio.
pub fn oracle_report(
    c: &Clusterer,
    choice: OracleChoice,
    cost: f64,
    enumeration_cap: u64,
) -> Result<Option<OracleReport>, Error> {
    let active = c.triple().smooth().domain();
    if active.is_empty() {
        return Ok(None);
    }
    let result = match choice {
        OracleChoice::None => return Ok(None),
        OracleChoice::Exact => {
            oracle::brute_force_opt(active, c.k(), c.universe(), enumeration_cap)?
        }
        OracleChoice::Gonzalez => oracle::gonzalez(active, c.k(), c.universe(), None)?,
    };
    let ratio = (active.len() > c.k() && result.value > 0.0).then(|| cost / result.value);
    Ok(Some(OracleReport {
        method: result.method,
        value: result.value,
        ratio,
    }))
}

/// Apply one event and build its report. `line` is only used in errors.
pub fn process_step(
    c: &mut Clusterer,
    event: &UpdateEvent,
    line: usize,
    opts: &RunOptions,
) -> Result<StepReport, RunError> {
    let outcome = c
        .apply_update(event)
        .map_err(|source| RunError::Precondition {
            line,
            event: event.to_string(),
            source,
        })?;
    let cost = c.current_cost();
    let oracle = oracle_report(c, opts.oracle, cost, opts.enumeration_cap).map_err(|source| {
        RunError::Oracle {
            step: outcome.step,
            source,
        }
    })?;
    let audit = (opts.verify && outcome.step % opts.audit_every.max(1) == 0)
        .then(|| audit(c, event.kind(), &outcome, cost, oracle.as_ref()));
    Ok(StepReport {
        step: outcome.step,
        event: event.kind(),
        id: event.id().clone(),
        active: c.triple().len(),
        centers: c.centers(),
        sym_diff: outcome.diff.sym_diff(),
        added: outcome.diff.added,
        removed: outcome.diff.removed,
        swaps: outcome.diff.swaps,
        cost,
        oracle,
        audit,
    })
}

/// Replay a stream, writing one report line per event. With `verify`, the
/// first failed audit stops the run after its report is written.
pub fn run_stream<R: BufRead, W: Write>(
    input: R,
    mut out: W,
    opts: &RunOptions,
) -> Result<RunSummary, RunError> {
    let reader = StreamReader::new(input)?;
    let header_line = reader.header_line();
    let setup = |e: Error| RunError::Parse {
        line: header_line,
        message: e.to_string(),
    };
    let universe = reader.header().universe().map_err(setup)?;
    let mut c = Clusterer::new(universe, reader.header().k).map_err(setup)?;
    let mut audited_steps = 0;
    for item in reader {
        let (line, event) = item?;
        let report = process_step(&mut c, &event, line, opts)?;
        writeln!(out, "{}", report.to_json())?;
        if let Some(a) = &report.audit {
            audited_steps += 1;
            if !a.passed() {
                out.flush()?;
                return Err(RunError::Invariant {
                    line,
                    step: report.step,
                    violations: a.violations.clone(),
                });
            }
        }
    }
    out.flush()?;
    Ok(RunSummary {
        steps: c.step(),
        audited_steps,
        final_centers: c.centers(),
        recourse: c.recourse_summary(),
    })
}
