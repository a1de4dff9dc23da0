//! Desk-scale exact state-vector simulation of the Rydberg Hamiltonian.
//!
//! `H = sum_j (omega/2 sigma_x_j - delta n_j) + sum_pairs (c6/r^6) n_j n_k`,
//! with all frequencies as angular frequencies in rad/us and distances in
//! um. Basis index bit convention: vertex 0 is the most significant bit, so
//! the binary rendering of an index equals the measurement bitstring with
//! vertex 0 leftmost.
//!
//! Evolution integrates the time-dependent Schrodinger equation with a
//! classic fourth-order Runge-Kutta stepper, waveforms sampled at the stage
//! times, and a per-step renormalization guard.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{average_degree, Graph};

/// Largest register the simulator accepts by default (2^22 amplitudes).
pub const DEFAULT_SIMULATOR_LIMIT: usize = 22;

/// Omega ramp duration of the adiabatic sweep schedule, in us.
pub const AQC_RAMP_US: f64 = 0.3;

/// Default quench rise/fall time, in ns.
pub const DEFAULT_RISE_FALL_NS: f64 = 50.0;

/// Default adiabatic sweep: peak Rabi frequency 1 MHz, detuning swept from
/// -4 MHz to +2 MHz (all as 2*pi*MHz).
pub const DEFAULT_AQC_OMEGA_PEAK_MHZ: f64 = 1.0;
pub const DEFAULT_AQC_DELTA_START_MHZ: f64 = -4.0;
pub const DEFAULT_AQC_DELTA_END_MHZ: f64 = 2.0;
pub const DEFAULT_AQC_DURATION_US: f64 = 4.0;

/// Converts a frequency quoted in MHz to an angular frequency in rad/us.
pub fn mhz_to_angular(mhz: f64) -> f64 {
    2.0 * PI * mhz
}

pub fn angular_to_mhz(angular: f64) -> f64 {
    angular / (2.0 * PI)
}

/// Van der Waals coefficient from one calibrated pair: `c6 = u_pair * r^6`.
pub fn c6_from_pair(u_pair: f64, r: f64) -> Result<f64> {
    if u_pair <= 0.0 || r <= 0.0 {
        return Err(Error::InvalidParam(
            "pair interaction and distance must be > 0".into(),
        ));
    }
    Ok(u_pair * r.powi(6))
}

/// C6 for the 70S Rydberg level (rad*um^6/us), from the 39 MHz lateral pair
/// at 5.3 um.
pub fn c6_rydberg_70s() -> f64 {
    c6_from_pair(mhz_to_angular(39.0), 5.3).expect("constants are positive")
}

/// C6 for the 71S Rydberg level (rad*um^6/us), from the 21.7 MHz lateral
/// pair at 6.0 um.
pub fn c6_rydberg_71s() -> f64 {
    c6_from_pair(mhz_to_angular(21.7), 6.0).expect("constants are positive")
}

/// Which atom pairs contribute `c6/r^6` interactions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionScope {
    /// All atom pairs interact (physical van der Waals tails).
    AllPairs,
    /// Only graph edges interact.
    EdgesOnly,
}

/// A register of atoms at the graph's positions.
#[derive(Debug, Clone)]
pub struct AtomRegister {
    graph: Graph,
    c6: f64,
    scope: InteractionScope,
    limit: usize,
}

impl AtomRegister {
    pub fn new(graph: &Graph, c6: f64, scope: InteractionScope) -> Result<Self> {
        Self::with_limit(graph, c6, scope, DEFAULT_SIMULATOR_LIMIT)
    }

    pub fn with_limit(graph: &Graph, c6: f64, scope: InteractionScope, limit: usize) -> Result<Self> {
        if c6 <= 0.0 {
            return Err(Error::InvalidParam("c6 must be > 0".into()));
        }
        if graph.n() > limit {
            return Err(Error::SimulatorLimit {
                n: graph.n(),
                limit,
            });
        }
        Ok(AtomRegister {
            graph: graph.clone(),
            c6,
            scope,
            limit,
        })
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn c6(&self) -> f64 {
        self.c6
    }

    pub fn scope(&self) -> InteractionScope {
        self.scope
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    /// Pair couplings `(i, j, c6/r^6)` within the interaction scope.
    fn couplings(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        match self.scope {
            InteractionScope::AllPairs => {
                for i in 0..self.n() {
                    for j in (i + 1)..self.n() {
                        out.push((i, j, self.c6 / self.graph.distance(i, j).powi(6)));
                    }
                }
            }
            InteractionScope::EdgesOnly => {
                for &(i, j) in self.graph.edges() {
                    let (i, j) = (i as usize, j as usize);
                    out.push((i, j, self.c6 / self.graph.distance(i, j).powi(6)));
                }
            }
        }
        out
    }

    /// Largest single pair coupling, for integrator step control.
    fn max_coupling(&self) -> f64 {
        self.couplings().iter().fold(0.0, |m, &(_, _, u)| m.max(u))
    }
}

// ============================================================================
// Pulse schedules
// ============================================================================

/// A piecewise-linear control waveform; constant outside its breakpoints.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Waveform {
    points: Vec<(f64, f64)>,
}

impl Waveform {
    /// Breakpoints must be non-empty with strictly increasing times.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParam("waveform needs at least one breakpoint".into()));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidParam(
                "waveform breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(Waveform { points })
    }

    pub fn constant(value: f64) -> Self {
        Waveform {
            points: vec![(0.0, value)],
        }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let pts = &self.points;
        if t <= pts[0].0 {
            return pts[0].1;
        }
        if t >= pts[pts.len() - 1].0 {
            return pts[pts.len() - 1].1;
        }
        let k = pts.partition_point(|&(tp, _)| tp <= t);
        let (t0, v0) = pts[k - 1];
        let (t1, v1) = pts[k];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    pub fn max_abs(&self) -> f64 {
        self.points.iter().fold(0.0, |m, &(_, v)| m.max(v.abs()))
    }

    fn min_value(&self) -> f64 {
        self.points
            .iter()
            .fold(f64::INFINITY, |m, &(_, v)| m.min(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseKind {
    Aqc,
    Quench,
    Custom,
}

/// Piecewise-linear `omega(t)`, `delta(t)` control waveforms on `[0, duration]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub duration: f64,
    pub omega: Waveform,
    pub delta: Waveform,
    pub kind: PulseKind,
}

impl PulseSchedule {
    pub fn new(duration: f64, omega: Waveform, delta: Waveform, kind: PulseKind) -> Result<Self> {
        if duration <= 0.0 {
            return Err(Error::InvalidParam("schedule duration must be > 0".into()));
        }
        for wf in [&omega, &delta] {
            let first = wf.points()[0].0;
            let last = wf.points()[wf.points().len() - 1].0;
            if first < 0.0 || last > duration + 1e-12 {
                return Err(Error::InvalidParam(
                    "waveform breakpoints must lie within [0, duration]".into(),
                ));
            }
        }
        if omega.min_value() < 0.0 {
            return Err(Error::InvalidParam("omega must be >= 0 everywhere".into()));
        }
        Ok(PulseSchedule {
            duration,
            omega,
            delta,
            kind,
        })
    }
}

/// Adiabatic sweep: omega ramps up over the first 0.3 us, holds, and ramps
/// down over the last 0.3 us; delta holds at `delta_start` during ramp-up,
/// sweeps linearly to `delta_end` during the hold, then holds.
pub fn aqc_schedule(
    duration: f64,
    omega_peak: f64,
    delta_start: f64,
    delta_end: f64,
) -> Result<PulseSchedule> {
    if duration <= 2.0 * AQC_RAMP_US {
        return Err(Error::InvalidParam(format!(
            "duration {duration} us is shorter than the {} us ramps",
            2.0 * AQC_RAMP_US
        )));
    }
    if omega_peak < 0.0 {
        return Err(Error::InvalidParam("omega peak must be >= 0".into()));
    }
    let up = AQC_RAMP_US;
    let down = duration - AQC_RAMP_US;
    let omega = Waveform::new(vec![
        (0.0, 0.0),
        (up, omega_peak),
        (down, omega_peak),
        (duration, 0.0),
    ])?;
    let delta = Waveform::new(vec![
        (0.0, delta_start),
        (up, delta_start),
        (down, delta_end),
        (duration, delta_end),
    ])?;
    PulseSchedule::new(duration, omega, delta, PulseKind::Aqc)
}

/// The default adiabatic sweep at a given duration.
pub fn aqc_schedule_default(duration: f64) -> Result<PulseSchedule> {
    aqc_schedule(
        duration,
        mhz_to_angular(DEFAULT_AQC_OMEGA_PEAK_MHZ),
        mhz_to_angular(DEFAULT_AQC_DELTA_START_MHZ),
        mhz_to_angular(DEFAULT_AQC_DELTA_END_MHZ),
    )
}

/// Resonant quench: a trapezoidal omega pulse at `delta = 0` whose flat top
/// lasts `t_q = pi / (2 sqrt(avg_degree) omega)`, with linear rise and fall
/// of `rise_fall_ns` on either side.
pub fn qe_schedule(graph: &Graph, omega: f64, rise_fall_ns: f64) -> Result<PulseSchedule> {
    if graph.edge_count() == 0 {
        return Err(Error::EdgelessQuench);
    }
    if omega <= 0.0 {
        return Err(Error::InvalidParam("omega must be > 0".into()));
    }
    if rise_fall_ns <= 0.0 {
        return Err(Error::InvalidParam("rise/fall time must be > 0".into()));
    }
    let t_r = rise_fall_ns * 1e-3;
    let t_q = PI / (2.0 * average_degree(graph).sqrt() * omega);
    let duration = t_q + 2.0 * t_r;
    let omega_wf = Waveform::new(vec![
        (0.0, 0.0),
        (t_r, omega),
        (t_r + t_q, omega),
        (duration, 0.0),
    ])?;
    PulseSchedule::new(duration, omega_wf, Waveform::constant(0.0), PulseKind::Quench)
}

// ============================================================================
// Hamiltonian and state
// ============================================================================

/// The Rydberg Hamiltonian at fixed `(omega, delta)`, stored as a cached
/// interaction diagonal plus the sigma-x bit-flip stencil.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    n: usize,
    omega: f64,
    delta: f64,
    /// Pair-interaction energy of every basis state.
    interaction: Vec<f64>,
    /// Occupation number of every basis state, pre-widened for the diagonal.
    popcounts: Vec<f64>,
}

/// Builds the Hamiltonian for the register at instantaneous `(omega, delta)`.
pub fn build_hamiltonian(register: &AtomRegister, omega_now: f64, delta_now: f64) -> Result<Hamiltonian> {
    let n = register.n();
    let dim = 1usize << n;
    // Couplings keyed by bit position: vertex j occupies bit n-1-j.
    let mut u_bits = vec![vec![0.0f64; n]; n];
    for (i, j, u) in register.couplings() {
        let (p, q) = (n - 1 - i, n - 1 - j);
        u_bits[p][q] += u;
        u_bits[q][p] += u;
    }
    // interaction[s] = interaction[s without lowest bit] + couplings of that
    // bit to the rest, giving an O(dim * n) table build.
    let mut interaction = vec![0.0f64; dim];
    for s in 1..dim {
        let p = s.trailing_zeros() as usize;
        let rest = s & (s - 1);
        let mut acc = interaction[rest];
        let mut m = rest;
        while m != 0 {
            let q = m.trailing_zeros() as usize;
            acc += u_bits[p][q];
            m &= m - 1;
        }
        interaction[s] = acc;
    }
    let popcounts = (0..dim).map(|s| s.count_ones() as f64).collect();
    Ok(Hamiltonian {
        n,
        omega: omega_now,
        delta: delta_now,
        interaction,
        popcounts,
    })
}

impl Hamiltonian {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.interaction.len()
    }

    pub fn diagonal(&self, index: usize) -> f64 {
        self.interaction[index] - self.delta * self.popcounts[index]
    }

    /// `out = H psi` at the stored `(omega, delta)`.
    pub fn apply_into(&self, psi: &[Complex64], out: &mut [Complex64]) {
        self.apply_with(self.omega, self.delta, psi, out);
    }

    fn apply_with(&self, omega: f64, delta: f64, psi: &[Complex64], out: &mut [Complex64]) {
        let half = 0.5 * omega;
        for (i, o) in out.iter_mut().enumerate() {
            let d = self.interaction[i] - delta * self.popcounts[i];
            let mut acc = psi[i] * d;
            if half != 0.0 {
                let mut flips = Complex64::new(0.0, 0.0);
                for p in 0..self.n {
                    flips += psi[i ^ (1usize << p)];
                }
                acc += flips * half;
            }
            *o = acc;
        }
    }

    /// `out = -i H(t) psi`, the Schrodinger right-hand side.
    fn derivative(&self, omega: f64, delta: f64, psi: &[Complex64], out: &mut [Complex64]) {
        let half = 0.5 * omega;
        for (i, o) in out.iter_mut().enumerate() {
            let d = self.interaction[i] - delta * self.popcounts[i];
            let mut acc = psi[i] * d;
            if half != 0.0 {
                let mut flips = Complex64::new(0.0, 0.0);
                for p in 0..self.n {
                    flips += psi[i ^ (1usize << p)];
                }
                acc += flips * half;
            }
            *o = Complex64::new(acc.im, -acc.re); // multiply by -i
        }
    }

    /// Real expectation value of `H` in `psi`.
    pub fn expectation(&self, psi: &[Complex64]) -> f64 {
        let mut h_psi = vec![Complex64::new(0.0, 0.0); psi.len()];
        self.apply_into(psi, &mut h_psi);
        psi.iter()
            .zip(&h_psi)
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }
}

/// A normalized many-body state over `2^n` amplitudes.
#[derive(Debug, Clone)]
pub struct QuantumState {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    /// All atoms in the ground state.
    pub fn ground(n: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        QuantumState { n, amplitudes }
    }

    /// Requires `2^n` amplitudes with unit L2 norm (within 1e-8).
    pub fn from_amplitudes(n: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != 1 << n {
            return Err(Error::InvalidParam(format!(
                "expected 2^{n} amplitudes, got {}",
                amplitudes.len()
            )));
        }
        let state = QuantumState { n, amplitudes };
        if (state.norm() - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidParam("state is not normalized".into()));
        }
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    /// Measurement probabilities of every basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Renders a basis index as a bitstring with vertex 0 leftmost.
    pub fn bitstring(&self, index: usize) -> String {
        format!("{:0width$b}", index, width = self.n)
    }
}

/// Integrates the time-dependent Schrodinger equation over the schedule.
///
/// The step size is capped at `dt_max` and at
/// `1 / (50 max(|omega|, |delta|, u_max))`. Each step is renormalized; a
/// pre-renormalization norm drift above 1e-6 aborts with an error.
pub fn evolve(
    register: &AtomRegister,
    schedule: &PulseSchedule,
    initial: &QuantumState,
    dt_max: f64,
) -> Result<QuantumState> {
    if dt_max <= 0.0 {
        return Err(Error::InvalidParam("dt_max must be > 0".into()));
    }
    if initial.n() != register.n() {
        return Err(Error::LengthMismatch {
            expected: register.n(),
            actual: initial.n(),
        });
    }
    if (initial.norm() - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidParam("initial state is not normalized".into()));
    }

    let hamiltonian = build_hamiltonian(register, 0.0, 0.0)?;
    let scale = schedule
        .omega
        .max_abs()
        .max(schedule.delta.max_abs())
        .max(register.max_coupling());
    let mut dt = dt_max;
    if scale > 0.0 {
        dt = dt.min(1.0 / (50.0 * scale));
    }
    let steps = (schedule.duration / dt).ceil().max(1.0) as u64;
    let h = schedule.duration / steps as f64;

    let dim = initial.dim();
    let mut psi = initial.amplitudes().to_vec();
    let mut stage = vec![Complex64::new(0.0, 0.0); dim];
    let mut k1 = stage.clone();
    let mut k2 = stage.clone();
    let mut k3 = stage.clone();
    let mut k4 = stage.clone();

    let mut t = 0.0;
    for step in 0..steps {
        let t_mid = t + 0.5 * h;
        let t_end = (step + 1) as f64 * schedule.duration / steps as f64;
        let (w0, d0) = (schedule.omega.value_at(t), schedule.delta.value_at(t));
        let (wm, dm) = (schedule.omega.value_at(t_mid), schedule.delta.value_at(t_mid));
        let (w1, d1) = (schedule.omega.value_at(t_end), schedule.delta.value_at(t_end));

        hamiltonian.derivative(w0, d0, &psi, &mut k1);
        for i in 0..dim {
            stage[i] = psi[i] + k1[i] * (0.5 * h);
        }
        hamiltonian.derivative(wm, dm, &stage, &mut k2);
        for i in 0..dim {
            stage[i] = psi[i] + k2[i] * (0.5 * h);
        }
        hamiltonian.derivative(wm, dm, &stage, &mut k3);
        for i in 0..dim {
            stage[i] = psi[i] + k3[i] * h;
        }
        hamiltonian.derivative(w1, d1, &stage, &mut k4);
        let sixth = h / 6.0;
        for i in 0..dim {
            psi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * sixth;
        }

        let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::IntegratorUnstable);
        }
        let inv = 1.0 / norm;
        for a in psi.iter_mut() {
            *a *= inv;
        }
        t = t_end;
    }

    QuantumState::from_amplitudes(register.n(), psi)
}

// ============================================================================
// Measurement
// ============================================================================

/// Measurement counts over bitstrings; vertex 0 is the leftmost character.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    n: usize,
    shots: u64,
    counts: BTreeMap<String, u64>,
}

impl SampleSet {
    /// Validates key lengths, characters, and that counts sum to the shots.
    pub fn from_counts(n: usize, counts: BTreeMap<String, u64>) -> Result<Self> {
        let mut shots = 0u64;
        for (bitstring, &count) in &counts {
            if bitstring.len() != n {
                return Err(Error::InvalidSamples(format!(
                    "bitstring {bitstring:?} has length {}, expected {n}",
                    bitstring.len()
                )));
            }
            if !bitstring.chars().all(|c| c == '0' || c == '1') {
                return Err(Error::InvalidSamples(format!(
                    "bitstring {bitstring:?} contains characters outside {{0,1}}"
                )));
            }
            if count == 0 {
                return Err(Error::InvalidSamples(format!(
                    "bitstring {bitstring:?} has a zero count"
                )));
            }
            shots += count;
        }
        if shots == 0 {
            return Err(Error::InvalidSamples("empty sample set".into()));
        }
        Ok(SampleSet { n, shots, counts })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    /// The most frequent bitstring; ties break toward the lowest bitstring.
    pub fn modal(&self) -> &str {
        self.counts
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(k, _)| k.as_str())
            .expect("sample set is non-empty")
    }
}

/// Draws `shots` i.i.d. measurements from the state's Born distribution.
pub fn sample(state: &QuantumState, shots: u64, seed: u64) -> Result<SampleSet> {
    if shots == 0 {
        return Err(Error::InvalidParam("shots must be >= 1".into()));
    }
    let mut cumulative = Vec::with_capacity(state.dim());
    let mut total = 0.0;
    for amp in state.amplitudes() {
        total += amp.norm_sqr();
        cumulative.push(total);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for _ in 0..shots {
        let u = rng.random::<f64>() * total;
        let index = cumulative.partition_point(|&c| c <= u).min(state.dim() - 1);
        *counts.entry(state.bitstring(index)).or_default() += 1;
    }
    SampleSet::from_counts(state.n(), counts)
}
