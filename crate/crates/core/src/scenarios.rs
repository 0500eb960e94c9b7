//! Synthetic non-stationary environments: loss sequences with a comparator
//! sequence of known path length.
//!
//! Two generators cover the spectrum of non-stationarity: a slowly drifting
//! minimizer (projected random walk) and abrupt piecewise-stationary jumps.
//! Both confine minimizers to the half-scaled set so that any exploration
//! radius up to `r/2` keeps perturbed queries feasible, and both record the
//! realized path length exactly. Loss families: quadratics (smooth, the
//! default) and norm cones (nonsmooth, whose flanks stay steep near the
//! minimizer).

use ndarray::Array1;
use rand::Rng;

use crate::error::{BcoError, Result};
use crate::geometry::{l2_dist, sample_unit_ball, FeasibleSet, UnitDirection};
use crate::oracle::LossFunction;
use crate::runner::{seeding, RunRng};
use crate::{real, to_f64, Scalar};

/// Total movement of a comparator sequence: the sum of consecutive
/// Euclidean distances (zero for a single point).
pub fn path_length<F: Scalar>(points: &[Array1<F>]) -> Result<F> {
    let mut total = F::zero();
    for pair in points.windows(2) {
        if pair[0].len() != pair[1].len() {
            return Err(BcoError::DimensionMismatch {
                expected: pair[0].len(),
                got: pair[1].len(),
            });
        }
        total = total + l2_dist(&pair[0], &pair[1]);
    }
    Ok(total)
}

/// Shape of the per-round losses a generator emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossFamily {
    /// `‖x - c_t‖²`: smooth, flat near the minimizer.
    Quadratic,
    /// `‖x - c_t‖`: nonsmooth, unit slope everywhere away from the
    /// minimizer, so feedback never fades as the learner closes in.
    AbsNorm,
}

impl LossFamily {
    fn make<F: Scalar>(self, center: Array1<F>) -> LossFunction<F> {
        match self {
            LossFamily::Quadratic => LossFunction::Quadratic { center },
            LossFamily::AbsNorm => LossFunction::AbsNorm { scale: F::one(), center },
        }
    }
}

/// How the minimizer moves over time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScenarioKind {
    /// Projected random walk with the given step length per round.
    Drift { rate: f64 },
    /// The horizon split into this many near-equal stationary blocks, with
    /// the minimizer redrawn uniformly at each block boundary.
    Piecewise { pieces: usize },
}

/// A complete recipe for a scenario; `generate` is deterministic in it.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec<F: Scalar> {
    pub kind: ScenarioKind,
    pub family: LossFamily,
    pub horizon: usize,
    pub set: FeasibleSet<F>,
    pub seed: u64,
}

impl<F: Scalar> ScenarioSpec<F> {
    pub fn generate(&self) -> Result<Scenario<F>> {
        if self.horizon == 0 {
            return Err(BcoError::invalid("horizon must be at least 1"));
        }
        let centers = match self.kind {
            ScenarioKind::Drift { rate } => {
                drift_centers(self.horizon, &self.set, rate, self.seed)?
            }
            ScenarioKind::Piecewise { pieces } => {
                piecewise_centers(self.horizon, &self.set, pieces, self.seed)?
            }
        };
        let losses = centers.iter().map(|c| self.family.make(c.clone())).collect();
        Scenario::from_parts(losses, centers, self.set.clone(), self.seed)
    }
}

/// A loss sequence, the comparator sequence it is scored against, and the
/// closed-form constants every learner needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<F: Scalar> {
    pub losses: Vec<LossFunction<F>>,
    pub comparators: Vec<Array1<F>>,
    pub set: FeasibleSet<F>,
    path_length: F,
    value_bound: F,
    lipschitz: F,
    seed: u64,
}

impl<F: Scalar> Scenario<F> {
    /// Assembles and validates a scenario from explicit parts: equal jagged
    /// lengths, feasible comparators, and the recorded path length are all
    /// checked here so downstream accounting can trust them.
    pub fn from_parts(
        losses: Vec<LossFunction<F>>,
        comparators: Vec<Array1<F>>,
        set: FeasibleSet<F>,
        seed: u64,
    ) -> Result<Self> {
        if losses.is_empty() {
            return Err(BcoError::invalid("a scenario needs at least one round"));
        }
        if losses.len() != comparators.len() {
            return Err(BcoError::invalid(format!(
                "{} losses against {} comparators",
                losses.len(),
                comparators.len()
            )));
        }
        let d = set.dimension();
        for loss in &losses {
            if loss.dimension() != d {
                return Err(BcoError::DimensionMismatch { expected: d, got: loss.dimension() });
            }
        }
        for u in &comparators {
            if !set.contains(F::zero(), u)? {
                return Err(BcoError::invalid(
                    "comparator point outside the feasible set",
                ));
            }
        }
        let path = path_length(&comparators)?;
        let value_bound = losses
            .iter()
            .map(|l| l.value_bound(&set))
            .fold(F::zero(), |a, b| a.max(b));
        let lipschitz = losses
            .iter()
            .map(|l| l.lipschitz_bound(&set))
            .fold(F::zero(), |a, b| a.max(b));
        Ok(Scenario { losses, comparators, set, path_length: path, value_bound, lipschitz, seed })
    }

    pub fn horizon(&self) -> usize {
        self.losses.len()
    }

    /// Realized comparator path length, recorded at construction.
    pub fn path_length(&self) -> F {
        self.path_length
    }

    /// `C`: bound on `|f_t|` over the set, maxed across rounds.
    pub fn value_bound(&self) -> F {
        self.value_bound
    }

    /// `L`: Lipschitz constant over the set, maxed across rounds.
    pub fn lipschitz(&self) -> F {
        self.lipschitz
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Rechecks every construction invariant; that the recorded path length
    /// matches a recomputation, every comparator is feasible, and the path
    /// length respects its diameter bound `2RT`.
    pub fn validate(&self) -> Result<()> {
        let recomputed = path_length(&self.comparators)?;
        if crate::to_f64((recomputed - self.path_length).abs()) > 1e-9 {
            return Err(BcoError::invalid("recorded path length drifted"));
        }
        for u in &self.comparators {
            if !self.set.contains(F::zero(), u)? {
                return Err(BcoError::invalid("infeasible comparator"));
            }
        }
        let cap = real::<F>(2.0)
            * self.set.outer_radius()
            * real::<F>(self.horizon() as f64);
        if self.path_length > cap {
            return Err(BcoError::invalid("path length exceeds the diameter bound"));
        }
        Ok(())
    }
}

/// One point uniform over the half-scaled set.
fn sample_half_set<F: Scalar>(rng: &mut RunRng, set: &FeasibleSet<F>) -> Result<Array1<F>> {
    match set {
        FeasibleSet::Ball { dim, radius } => {
            let half = *radius * real::<F>(0.5);
            Ok(sample_unit_ball::<F, _>(rng, *dim)?.mapv(|v| v * half))
        }
        FeasibleSet::Box { dim, halfwidth } => {
            let half = to_f64(*halfwidth) * 0.5;
            Ok(Array1::from_iter(
                (0..*dim).map(|_| real(rng.gen_range(-half..=half))),
            ))
        }
    }
}

fn drift_centers<F: Scalar>(
    horizon: usize,
    set: &FeasibleSet<F>,
    rate: f64,
    seed: u64,
) -> Result<Vec<Array1<F>>> {
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(BcoError::invalid(format!("drift rate must be finite and >= 0, got {rate}")));
    }
    let mut rng = seeding::scenario_rng(seed);
    let half = real::<F>(0.5);
    let step = real::<F>(rate);
    let mut centers = Vec::with_capacity(horizon);
    let mut c: Array1<F> = Array1::zeros(set.dimension());
    centers.push(c.clone());
    for _ in 1..horizon {
        let dir = UnitDirection::<F>::sample(&mut rng, set.dimension())?;
        let mut next = c.clone();
        next.scaled_add(step, dir.as_array());
        c = set.project(half, &next)?;
        centers.push(c.clone());
    }
    Ok(centers)
}

fn piecewise_centers<F: Scalar>(
    horizon: usize,
    set: &FeasibleSet<F>,
    pieces: usize,
    seed: u64,
) -> Result<Vec<Array1<F>>> {
    if pieces == 0 || pieces > horizon {
        return Err(BcoError::invalid(format!(
            "piece count must lie in [1, {horizon}], got {pieces}"
        )));
    }
    let mut rng = seeding::scenario_rng(seed);
    let mut centers = Vec::with_capacity(horizon);
    for block in 0..pieces {
        // Boundaries i·T/K in integer arithmetic: block sizes differ by at
        // most one and sum to the horizon.
        let begin = block * horizon / pieces;
        let end = (block + 1) * horizon / pieces;
        let c = sample_half_set(&mut rng, set)?;
        for _ in begin..end {
            centers.push(c.clone());
        }
    }
    Ok(centers)
}

/// Drifting scenario with quadratic losses: the minimizer walks inside the
/// half-scaled set with steps of the given length, the comparator follows
/// the minimizer.
pub fn gen_drift<F: Scalar>(
    horizon: usize,
    set: FeasibleSet<F>,
    rate: f64,
    seed: u64,
) -> Result<Scenario<F>> {
    ScenarioSpec { kind: ScenarioKind::Drift { rate }, family: LossFamily::Quadratic, horizon, set, seed }
        .generate()
}

/// Piecewise-stationary scenario with quadratic losses: the minimizer jumps
/// to a fresh uniform point of the half-scaled set at each block boundary.
pub fn gen_piecewise<F: Scalar>(
    horizon: usize,
    set: FeasibleSet<F>,
    pieces: usize,
    seed: u64,
) -> Result<Scenario<F>> {
    ScenarioSpec {
        kind: ScenarioKind::Piecewise { pieces },
        family: LossFamily::Quadratic,
        horizon,
        set,
        seed,
    }
    .generate()
}
