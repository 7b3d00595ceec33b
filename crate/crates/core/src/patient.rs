//! The interaction source: a simulated patient arm that drives the contact
//! through a compliant coupling.
//!
//! The intended trajectory is a slow fundamental plus integer harmonic
//! components. The low harmonics shape the movement; a physiological tremor
//! band (integer harmonics around 10-13 Hz) supplies the resonant content
//! that the adaptive controller tunes against. Per-cycle phase offsets are
//! redrawn from N(0, sigma_phase^2), so the stimulus is stochastically
//! modulated but seed-reproducible.

use serde::{Deserialize, Serialize};

use crate::rng::SeededStream;
use crate::SimError;

/// Patient state label; ground truth for the context classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PatientMode {
    Stable,
    Fatigued,
    Unstable,
}

impl std::fmt::Display for PatientMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PatientMode::Stable => write!(f, "stable"),
            PatientMode::Fatigued => write!(f, "fatigued"),
            PatientMode::Unstable => write!(f, "unstable"),
        }
    }
}

/// Slow drift of the tremor band's center line, in harmonics per cycle.
/// Models the gradual frequency migration of a fatiguing arm; the freeze
/// protocol uses it to make a frozen parameterization measurably stale.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, Default)]
pub struct TremorDrift {
    pub start_cycle: u32,
    pub lines_per_cycle: f64,
}

/// Patient model parameters (Stable baseline).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatientParams {
    /// Coupling stiffness in N/m.
    pub k_p: f64,
    /// Coupling damping in N s/m.
    pub c_p: f64,
    /// Reaction latency in s.
    pub tau: f64,
    /// Movement fundamental in Hz.
    pub f0: f64,
    /// Intended-trajectory amplitude in m (fundamental component).
    pub x_amp: f64,
    /// Integer harmonic content as (harmonic index, relative weight).
    pub harmonic_weights: Vec<(u32, f64)>,
    /// Per-cycle phase-jitter std in rad (applied to every component).
    pub sigma_phase: f64,
    /// Phase-jitter std used when the Unstable mode is active.
    pub sigma_phase_unstable: f64,
    /// Peak-force target in N, inside [5, 15].
    pub force_target: f64,
    /// Optional tremor-band drift.
    pub tremor_drift: Option<TremorDrift>,
}

/// Harmonic indices at or above this count as tremor-band lines and take
/// part in the drift re-weighting.
pub const TREMOR_MIN_HARMONIC: u32 = 10;
const TREMOR_MAX_HARMONIC: u32 = 40;

impl Default for PatientParams {
    fn default() -> Self {
        PatientParams {
            k_p: 2500.0,
            c_p: 5.0,
            tau: 0.0,
            f0: 0.5,
            x_amp: 0.02,
            harmonic_weights: default_harmonics(),
            sigma_phase: 0.002,
            sigma_phase_unstable: 0.25,
            force_target: 10.0,
            tremor_drift: None,
        }
    }
}

/// Low harmonics shaping the movement plus a tremor hump at 10-13 Hz
/// (harmonics 20-26 of the 0.5 Hz fundamental).
pub fn default_harmonics() -> Vec<(u32, f64)> {
    vec![
        (2, 0.05),
        (3, 0.025),
        (20, 0.012),
        (21, 0.0215),
        (22, 0.029),
        (23, 0.0335),
        (24, 0.029),
        (25, 0.0215),
        (26, 0.012),
    ]
}

impl PatientParams {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.k_p > 0.0) {
            return Err(SimError::domain("k_p must be positive"));
        }
        if self.c_p < 0.0 || self.tau < 0.0 || self.sigma_phase < 0.0 {
            return Err(SimError::domain("c_p, tau, sigma_phase must be non-negative"));
        }
        if !(self.f0 > 0.0) {
            return Err(SimError::domain("f0 must be positive"));
        }
        if !(5.0..=15.0).contains(&self.force_target) {
            return Err(SimError::domain("force_target must lie in [5, 15] N"));
        }
        Ok(())
    }

    /// Effective parameters under a context mode. Stable is the identity;
    /// Fatigued cuts the coupling stiffness by 20% and adds 80 ms latency;
    /// Unstable raises the per-cycle phase variance.
    pub fn apply_mode(&self, mode: PatientMode) -> PatientParams {
        let mut p = self.clone();
        match mode {
            PatientMode::Stable => {}
            PatientMode::Fatigued => {
                p.k_p *= 0.8;
                p.tau += 0.080;
            }
            PatientMode::Unstable => {
                p.sigma_phase = self.sigma_phase_unstable;
            }
        }
        p
    }
}

/// Per-cycle phase offsets, one slot per potentially active component:
/// index 0 is the fundamental, then the configured low harmonics, then the
/// tremor lines 10..=40. The draw count per cycle is fixed so that stream
/// consumption never depends on the drift state.
#[derive(Debug, Clone)]
struct CyclePhases {
    fundamental: f64,
    low: Vec<f64>,
    tremor: Vec<f64>,
}

/// Patient trajectory generator with a per-cycle phase cache. Queries may
/// look back in time (latency) but cycles are only ever extended forward.
pub struct Patient {
    pub params: PatientParams,
    low_harmonics: Vec<(u32, f64)>,
    tremor_base: Vec<(u32, f64)>,
    phases: Vec<CyclePhases>,
    /// sigma used per cycle (mode schedule can change it between cycles)
    sigma_of_cycle: Vec<f64>,
    pending_sigma: f64,
}

impl Patient {
    pub fn new(params: PatientParams) -> Self {
        let low_harmonics: Vec<(u32, f64)> = params
            .harmonic_weights
            .iter()
            .copied()
            .filter(|(h, _)| *h < TREMOR_MIN_HARMONIC)
            .collect();
        let tremor_base: Vec<(u32, f64)> = params
            .harmonic_weights
            .iter()
            .copied()
            .filter(|(h, _)| *h >= TREMOR_MIN_HARMONIC)
            .collect();
        let pending_sigma = params.sigma_phase;
        Patient {
            params,
            low_harmonics,
            tremor_base,
            phases: Vec::new(),
            sigma_of_cycle: Vec::new(),
            pending_sigma,
        }
    }

    /// Set the jitter level that applies to cycles drawn from now on (the
    /// mode schedule calls this at cycle boundaries).
    pub fn set_sigma_phase(&mut self, sigma: f64) {
        self.pending_sigma = sigma;
    }

    fn ensure_cycle(&mut self, cycle: usize, rng: &mut SeededStream) {
        while self.phases.len() <= cycle {
            let sigma = self.pending_sigma;
            let draw = |rng: &mut SeededStream, sigma: f64| {
                if sigma > 0.0 {
                    rng.normal() * sigma
                } else {
                    rng.normal() * 0.0
                }
            };
            let fundamental = draw(rng, sigma);
            let low = (0..self.low_harmonics.len())
                .map(|_| draw(rng, sigma))
                .collect();
            let tremor = (TREMOR_MIN_HARMONIC..=TREMOR_MAX_HARMONIC)
                .map(|_| draw(rng, sigma))
                .collect();
            self.phases.push(CyclePhases {
                fundamental,
                low,
                tremor,
            });
            self.sigma_of_cycle.push(sigma);
        }
    }

    /// Tremor-line weight at harmonic h for a given cycle, following the
    /// drifting hump center when a drift is configured.
    fn tremor_weight(&self, h: u32, cycle: usize) -> f64 {
        let shift = match self.params.tremor_drift {
            Some(d) if (cycle as u32) > d.start_cycle => {
                d.lines_per_cycle * (cycle as u32 - d.start_cycle) as f64
            }
            _ => 0.0,
        };
        // Interpolate the base profile at (h - shift).
        let pos = h as f64 - shift;
        let lo = pos.floor() as i64;
        let frac = pos - lo as f64;
        let base = |idx: i64| -> f64 {
            if idx < 0 {
                return 0.0;
            }
            self.tremor_base
                .iter()
                .find(|(hh, _)| *hh as i64 == idx)
                .map(|(_, w)| *w)
                .unwrap_or(0.0)
        };
        base(lo) * (1.0 - frac) + base(lo + 1) * frac
    }

    /// Intended trajectory (position, velocity) at time t. `rng` extends the
    /// per-cycle phase cache when t crosses into a new cycle.
    pub fn intended_trajectory(&mut self, t: f64, rng: &mut SeededStream) -> (f64, f64) {
        let t = t.max(0.0);
        let f0 = self.params.f0;
        let cycle = (t * f0 + crate::TIME_EPS).floor() as usize;
        self.ensure_cycle(cycle, rng);
        let ph = &self.phases[cycle];
        let w1 = 2.0 * std::f64::consts::PI * f0;
        let amp = self.params.x_amp;

        let mut x = (w1 * t + ph.fundamental).sin();
        let mut v = w1 * (w1 * t + ph.fundamental).cos();
        for (i, (h, wgt)) in self.low_harmonics.iter().enumerate() {
            let wh = *h as f64 * w1;
            let phase = wh * t + ph.low[i];
            x += wgt * phase.sin();
            v += wgt * wh * phase.cos();
        }
        for h in TREMOR_MIN_HARMONIC..=TREMOR_MAX_HARMONIC {
            let wgt = self.tremor_weight(h, cycle);
            if wgt == 0.0 {
                continue;
            }
            let wh = h as f64 * w1;
            let phase = wh * t + ph.tremor[(h - TREMOR_MIN_HARMONIC) as usize];
            x += wgt * phase.sin();
            v += wgt * wh * phase.cos();
        }
        (amp * x, amp * v)
    }

    /// Contact force through the compliant coupling, with the reaction
    /// latency applied to the intended trajectory. `kp_scale` carries the
    /// mode's stiffness factor and `extra_tau` its added latency.
    #[allow(clippy::too_many_arguments)]
    pub fn contact_force(
        &mut self,
        t: f64,
        x: f64,
        v: f64,
        kp_scale: f64,
        extra_tau: f64,
        rng: &mut SeededStream,
    ) -> (f64, f64, f64) {
        let delayed = t - (self.params.tau + extra_tau);
        let (xp, vp) = self.intended_trajectory(delayed, rng);
        let f = self.params.k_p * kp_scale * (xp - x) + self.params.c_p * (vp - v);
        (f, xp, vp)
    }
}

/// Disturbance configuration for the autonomy protocol.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DisturbanceConfig {
    /// Impulse magnitude in N (8 N in the autonomy protocol).
    pub magnitude: f64,
    /// Pulse duration in s.
    pub duration: f64,
    /// Mean pulse onsets per movement cycle (Poisson).
    pub mean_rate: f64,
    pub enabled: bool,
}

impl Default for DisturbanceConfig {
    fn default() -> Self {
        DisturbanceConfig {
            magnitude: 8.0,
            duration: 0.05,
            mean_rate: 0.5,
            enabled: false,
        }
    }
}

/// A scheduled impulse: onset time and sign.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DisturbanceEvent {
    pub t_onset: f64,
    pub sign: f64,
    /// True when this onset lands inside the previous pulse's window.
    pub overlaps_previous: bool,
}

/// Pre-generated Poisson schedule of impulse disturbances.
#[derive(Debug, Clone, Default)]
pub struct DisturbanceSchedule {
    pub config: DisturbanceConfig,
    pub events: Vec<DisturbanceEvent>,
}

impl DisturbanceSchedule {
    pub fn generate(config: DisturbanceConfig, horizon: f64, f0: f64, rng: &mut SeededStream) -> Self {
        let mut events = Vec::new();
        if config.enabled && config.mean_rate > 0.0 {
            let rate_per_s = config.mean_rate * f0;
            let mut t = 0.0;
            let mut prev_end = f64::NEG_INFINITY;
            loop {
                t += rng.exponential(rate_per_s);
                if t > horizon {
                    break;
                }
                let sign = rng.sign();
                events.push(DisturbanceEvent {
                    t_onset: t,
                    sign,
                    overlaps_previous: t < prev_end,
                });
                prev_end = t + config.duration;
            }
        }
        DisturbanceSchedule { config, events }
    }

    /// Disturbance force at time t: +/- magnitude inside an active pulse
    /// window, zero otherwise. A fresh onset supersedes an ongoing pulse, so
    /// the magnitude is always exactly +/- 8 N inside a window.
    pub fn force(&self, t: f64) -> f64 {
        if !self.config.enabled {
            return 0.0;
        }
        let mut f = 0.0;
        for ev in &self.events {
            if t >= ev.t_onset && t < ev.t_onset + self.config.duration {
                f = ev.sign * self.config.magnitude;
            }
            if ev.t_onset > t {
                break;
            }
        }
        f
    }
}

/// Bisection on the intended-trajectory amplitude until the steady-state
/// peak contact force matches the target within 2%. `measure_peak` runs the
/// closed calibration loop (5 clean cycles at the episode's preset) and
/// returns the observed peak force for a candidate amplitude.
pub fn calibrate_amplitude(
    force_target: f64,
    mut measure_peak: impl FnMut(f64) -> f64,
) -> Result<f64, SimError> {
    const MAX_STEPS: u32 = 40;
    // Locate the peak-force minimum: below it the robot drags an
    // under-driving patient, above it the patient over-drives the robot.
    // Calibration lives on the increasing branch.
    let scan: Vec<f64> = (1..=40).map(|i| 0.0025 * i as f64).collect();
    let peaks: Vec<f64> = scan.iter().map(|&a| measure_peak(a)).collect();
    let (i_min, floor) = peaks
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, p)| (i, *p))
        .unwrap();
    if floor > force_target {
        return Err(SimError::Calibration {
            steps: 0,
            target: force_target,
            floor,
        });
    }
    let mut lo = scan[i_min];
    let mut hi = *scan.last().unwrap();
    if measure_peak(hi) < force_target {
        return Err(SimError::Calibration {
            steps: 0,
            target: force_target,
            floor,
        });
    }
    let mut steps = 0;
    let mut mid = 0.5 * (lo + hi);
    while steps < MAX_STEPS {
        mid = 0.5 * (lo + hi);
        let p = measure_peak(mid);
        if (p - force_target).abs() <= 0.02 * force_target {
            return Ok(mid);
        }
        if p < force_target {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
    }
    let p = measure_peak(mid);
    if (p - force_target).abs() <= 0.02 * force_target {
        Ok(mid)
    } else {
        Err(SimError::Calibration {
            steps,
            target: force_target,
            floor,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, SeededStream};
    use approx::assert_relative_eq;

    fn stream_for_test() -> SeededStream {
        SeededStream::new(11, stream::PATIENT)
    }

    #[test]
    fn pure_sinusoid_at_origin() {
        let params = PatientParams {
            harmonic_weights: vec![],
            sigma_phase: 0.0,
            ..Default::default()
        };
        let mut p = Patient::new(params);
        let mut rng = stream_for_test();
        let (x, v) = p.intended_trajectory(0.0, &mut rng);
        assert_relative_eq!(x, 0.0, epsilon = 1e-12);
        let expected_v = 2.0 * std::f64::consts::PI * 0.5 * 0.02;
        assert_relative_eq!(v, expected_v, epsilon = 1e-12);
    }

    #[test]
    fn periodic_without_jitter() {
        let params = PatientParams {
            sigma_phase: 0.0,
            ..Default::default()
        };
        let mut p = Patient::new(params);
        let mut rng = stream_for_test();
        for i in 0..40 {
            let t = 0.05 * i as f64;
            let (x1, _) = p.intended_trajectory(t, &mut rng);
            let (x2, _) = p.intended_trajectory(t + 2.0, &mut rng);
            assert_relative_eq!(x1, x2, epsilon = 1e-9);
        }
    }

    #[test]
    fn velocity_is_derivative() {
        let mut p = Patient::new(PatientParams {
            sigma_phase: 0.0,
            ..Default::default()
        });
        let mut rng = stream_for_test();
        let h = 1e-6;
        for i in 1..30 {
            let t = 0.037 * i as f64;
            let (xm, _) = p.intended_trajectory(t - h, &mut rng);
            let (xp, _) = p.intended_trajectory(t + h, &mut rng);
            let (_, v) = p.intended_trajectory(t, &mut rng);
            assert_relative_eq!(v, (xp - xm) / (2.0 * h), epsilon = 1e-4);
        }
    }

    #[test]
    fn phase_jitter_statistics() {
        // sample std of the per-cycle fundamental offsets ~ 0.3 +/- 0.05
        let params = PatientParams {
            sigma_phase: 0.3,
            ..Default::default()
        };
        let mut p = Patient::new(params);
        let mut rng = stream_for_test();
        p.ensure_cycle(199, &mut rng);
        let offsets: Vec<f64> = p.phases.iter().map(|c| c.fundamental).collect();
        let mean = offsets.iter().sum::<f64>() / offsets.len() as f64;
        let std = (offsets.iter().map(|o| (o - mean) * (o - mean)).sum::<f64>()
            / offsets.len() as f64)
            .sqrt();
        assert!((std - 0.3).abs() < 0.05, "std {std}");
    }

    #[test]
    fn contact_force_examples() {
        // pure stiffness mismatch: 2500 N/m * 4 mm = 10 N
        let params = PatientParams {
            k_p: 2500.0,
            c_p: 0.0,
            harmonic_weights: vec![],
            sigma_phase: 0.0,
            x_amp: 0.02,
            ..Default::default()
        };
        let mut p = Patient::new(params);
        let mut rng = stream_for_test();
        // at t = 0.5 s (quarter cycle) xp = x_amp exactly, vp = 0
        let (f, xp, _) = p.contact_force(0.5, 0.02 - 0.004, 0.0, 1.0, 0.0, &mut rng);
        assert_relative_eq!(xp, 0.02, epsilon = 1e-12);
        assert_relative_eq!(f, 10.0, epsilon = 1e-9);
        // zero mismatch -> zero force
        let vp = vp_of(&mut p, 0.5, &mut rng);
        let (f0, _, vp_out) = p.contact_force(0.5, 0.02, vp, 1.0, 0.0, &mut rng);
        assert_relative_eq!(vp_out, 0.0, epsilon = 1e-9);
        assert_relative_eq!(f0, 0.0, epsilon = 1e-9);
        // fatigued coupling scales force by 0.8
        let (ff, _, _) = p.contact_force(0.5, 0.02 - 0.004, 0.0, 0.8, 0.0, &mut rng);
        assert_relative_eq!(ff, 8.0, epsilon = 1e-9);
    }

    fn vp_of(p: &mut Patient, t: f64, rng: &mut SeededStream) -> f64 {
        p.intended_trajectory(t, rng).1
    }

    #[test]
    fn apply_mode_table() {
        let base = PatientParams::default();
        let stable = base.apply_mode(PatientMode::Stable);
        assert_eq!(stable.k_p, base.k_p);
        assert_eq!(stable.tau, base.tau);
        let fatigued = base.apply_mode(PatientMode::Fatigued);
        assert_relative_eq!(fatigued.k_p, 2000.0);
        assert_relative_eq!(fatigued.tau, 0.080);
        let unstable = base.apply_mode(PatientMode::Unstable);
        assert_relative_eq!(unstable.sigma_phase, base.sigma_phase_unstable);
        assert_eq!(unstable.k_p, base.k_p);
        assert_eq!(unstable.tau, base.tau);
    }

    #[test]
    fn disturbance_force_magnitude_and_counts() {
        let cfg = DisturbanceConfig {
            enabled: true,
            mean_rate: 0.5,
            ..Default::default()
        };
        let mut rng = SeededStream::new(3, stream::DISTURBANCE);
        // 100 cycles at 0.5 Hz = 200 s
        let sched = DisturbanceSchedule::generate(cfg, 200.0, 0.5, &mut rng);
        let n = sched.events.len();
        assert!((35..=65).contains(&n), "event count {n}");
        for ev in &sched.events {
            let f = sched.force(ev.t_onset + 0.5 * cfg.duration);
            assert_relative_eq!(f.abs(), 8.0);
        }
        // outside all windows the force is zero
        let mut t = 0.0;
        let mut zeros = 0;
        while t < 200.0 {
            let inside = sched
                .events
                .iter()
                .any(|e| t >= e.t_onset && t < e.t_onset + cfg.duration);
            if !inside {
                assert_eq!(sched.force(t), 0.0);
                zeros += 1;
            }
            t += 0.31;
        }
        assert!(zeros > 500);
    }

    #[test]
    fn disturbance_disabled_is_silent() {
        let cfg = DisturbanceConfig::default();
        let mut rng = SeededStream::new(3, stream::DISTURBANCE);
        let sched = DisturbanceSchedule::generate(cfg, 100.0, 0.5, &mut rng);
        assert!(sched.events.is_empty());
        for i in 0..1000 {
            assert_eq!(sched.force(0.1 * i as f64), 0.0);
        }
    }

    #[test]
    fn calibration_bisection_on_synthetic_response() {
        // peak(a) = |a - 0.02| * 2000 + 3: V-shaped with floor 3 N at 20 mm
        let measure = |a: f64| (a - 0.02).abs() * 2000.0 + 3.0;
        let a = calibrate_amplitude(10.0, measure).unwrap();
        assert!((measure(a) - 10.0).abs() <= 0.2);
        assert!(a > 0.02, "must land on the increasing branch, got {a}");
        // monotone in the target
        let a5 = calibrate_amplitude(5.0, measure).unwrap();
        let a15 = calibrate_amplitude(15.0, measure).unwrap();
        assert!(a5 < a && a < a15);
        // unreachable target errors out
        let err = calibrate_amplitude(10.0, |_| 12.0);
        assert!(matches!(err, Err(SimError::Calibration { .. })));
    }

    #[test]
    fn tremor_drift_shifts_weight_upward() {
        let params = PatientParams {
            tremor_drift: Some(TremorDrift {
                start_cycle: 10,
                lines_per_cycle: 0.1,
            }),
            ..Default::default()
        };
        let p = Patient::new(params);
        // before drift starts the profile is the base profile
        assert_relative_eq!(p.tremor_weight(23, 5), 0.0335);
        // after 40 cycles of drift the hump center moved by 3 lines
        let w23 = p.tremor_weight(23, 40);
        let w26 = p.tremor_weight(26, 40);
        assert!(w26 > w23, "hump should have moved up: w23={w23} w26={w26}");
    }
}
