//! Point-process sampling and the carrier-sensing retaining model.

use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::netmodel::{NeighborRule, ScenarioConfig, SensingLaw};
use crate::numeric;
use crate::specfun;

/// Reproducible random stream: one ChaCha8 stream per (seed, stream_id).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointPattern {
    pub points: Vec<[f64; 2]>,
    pub marks: Option<Vec<f64>>,
    pub retained: Option<Vec<bool>>,
    pub window_radius: f64,
}

impl PointPattern {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn retained_count(&self) -> Option<usize> {
        self.retained
            .as_ref()
            .map(|r| r.iter().filter(|&&b| b).count())
    }

    /// Columns `x,y,mark,retained`; absent values are left empty.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        out.write_record(["x", "y", "mark", "retained"])?;
        for (i, p) in self.points.iter().enumerate() {
            let mark = self
                .marks
                .as_ref()
                .map(|m| m[i].to_string())
                .unwrap_or_default();
            let kept = self
                .retained
                .as_ref()
                .map(|r| r[i].to_string())
                .unwrap_or_default();
            out.write_record([p[0].to_string(), p[1].to_string(), mark, kept])?;
        }
        out.flush()?;
        Ok(())
    }
}

pub(crate) fn fill_ppp<R: Rng + ?Sized>(
    rng: &mut R,
    density: f64,
    window_radius: f64,
    out: &mut Vec<[f64; 2]>,
) {
    out.clear();
    let mean = density * PI * window_radius * window_radius;
    if !(mean > 0.0) {
        return;
    }
    let n = Poisson::new(mean)
        .expect("positive finite mean")
        .sample(rng) as usize;
    out.reserve(n);
    for _ in 0..n {
        let r = window_radius * rng.random::<f64>().sqrt();
        let th = 2.0 * PI * rng.random::<f64>();
        out.push([r * th.cos(), r * th.sin()]);
    }
}

/// Homogeneous PPP on the disc of `window_radius` about the origin.
pub fn sample_ppp(density: f64, window_radius: f64, stream: &RngStream) -> PointPattern {
    let mut rng = stream.rng();
    let mut points = Vec::new();
    fill_ppp(&mut rng, density, window_radius, &mut points);
    PointPattern {
        points,
        marks: None,
        retained: None,
        window_radius,
    }
}

/// As [`sample_ppp`] with i.i.d. uniform time marks.
pub fn sample_marked_ppp(density: f64, window_radius: f64, stream: &RngStream) -> PointPattern {
    let mut rng = stream.rng();
    let mut points = Vec::new();
    fill_ppp(&mut rng, density, window_radius, &mut points);
    let marks = (0..points.len()).map(|_| rng.random::<f64>()).collect();
    PointPattern {
        points,
        marks: Some(marks),
        retained: None,
        window_radius,
    }
}

/// r_c = (ρ_f ln(1/ε) / T_B)^{1/α_f}; must exceed 1.
pub fn contention_radius(cfg: &ScenarioConfig) -> Result<f64> {
    let rc = cfg.derived_contention_radius()?;
    if !(rc > 1.0) || !rc.is_finite() {
        return Err(Error::ContentionRadius(rc));
    }
    Ok(rc)
}

/// The configured override if present, else [`contention_radius`].
pub fn resolved_contention_radius(cfg: &ScenarioConfig) -> Result<f64> {
    match cfg.sensing.contention_radius {
        Some(rc) if rc > 1.0 && rc.is_finite() => Ok(rc),
        Some(rc) => Err(Error::ContentionRadius(rc)),
        None => contention_radius(cfg),
    }
}

/// Neighbourhood success probability in closed form.
pub fn nsp_closed(cfg: &ScenarioConfig) -> Result<f64> {
    let rc = resolved_contention_radius(cfg)?;
    let alpha = cfg.femto.pathloss_exp;
    let t = cfg.sensing.sense_threshold / cfg.transmit_snr_f;
    let delta = 2.0 / alpha;
    let rc2 = rc * rc;
    let far = t * rc.powf(alpha);
    let p = (-t).exp() / rc2
        + 2.0 / (alpha * rc2) * t.powf(-delta) * specfun::gamma_upper(delta, t)?
        - 2.0 / alpha * far.powf(-delta) * specfun::gamma_upper(delta, far)?;
    if !(-1e-9..=1.0 + 1e-9).contains(&p) {
        log::warn!("nsp_closed: raw value {p} outside [0, 1], clamping");
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Neighbourhood success probability by quadrature over the contention disc,
/// using the configured sensing law.
pub fn nsp_numeric(cfg: &ScenarioConfig) -> Result<f64> {
    let rc = resolved_contention_radius(cfg)?;
    let alpha = cfg.femto.pathloss_exp;
    let t = cfg.sensing.sense_threshold / cfg.transmit_snr_f;
    let law = cfg.sensing.law;
    let rc2 = rc * rc;
    let f = |r: f64| 2.0 * r / rc2 * (-t * law.attenuation(r, alpha)).exp();
    let inner = numeric::integrate("nsp_numeric", f, 0.0, 1.0, 5e-13)?;
    let outer = numeric::integrate("nsp_numeric", f, 1.0, rc, 5e-13)?;
    Ok(inner + outer)
}

/// Matérn-II style retention (1 − e^{−N_e P_s}) / (N_e P_s), N_e = π λ_f r_c².
pub fn retention_probability(cfg: &ScenarioConfig) -> Result<f64> {
    let rc = resolved_contention_radius(cfg)?;
    let ps = nsp_closed(cfg)?;
    let x = PI * cfg.femto.density * rc * rc * ps;
    Ok(retention_from_mean_neighbours(x))
}

pub(crate) fn retention_from_mean_neighbours(x: f64) -> f64 {
    if x < 1e-10 {
        1.0 - 0.5 * x
    } else {
        -(-x).exp_m1() / x
    }
}

/// λ_f^R = λ_f P_R.
pub fn effective_density(cfg: &ScenarioConfig) -> Result<f64> {
    Ok(cfg.femto.density * retention_probability(cfg)?)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Largest value a link fade can take: −ln(2^{−54}).
const MAX_FADE: f64 = 37.5;

/// Carrier-sensing neighbour relation with one reciprocal fade per link.
///
/// Link fades are unit-mean exponentials derived from a hash of
/// (key, min(i,j), max(i,j)), so the relation is symmetric by construction
/// and no fade is ever stored.
#[derive(Debug, Clone)]
pub struct SensingRule {
    pub key: u64,
    pub transmit_snr: f64,
    pub threshold: f64,
    pub alpha: f64,
    pub law: SensingLaw,
    pub rule: NeighborRule,
    pub contention_radius: f64,
    cutoff: f64,
}

impl SensingRule {
    pub fn new(cfg: &ScenarioConfig, key: u64) -> Result<Self> {
        let rc = resolved_contention_radius(cfg)?;
        let transmit_snr = cfg.transmit_snr_f;
        let threshold = cfg.sensing.sense_threshold;
        let alpha = cfg.femto.pathloss_exp;
        let law = cfg.sensing.law;
        let rule = cfg.sensing.neighbor_rule;
        let cutoff = match rule {
            NeighborRule::Radius => rc,
            NeighborRule::Sensed => {
                let c = MAX_FADE * transmit_snr / threshold;
                match law {
                    SensingLaw::Clipped => c.max(1.0).powf(1.0 / alpha),
                    SensingLaw::Unbounded => c.powf(1.0 / alpha),
                    SensingLaw::Bounded => (c - 1.0).max(0.0).powf(1.0 / alpha),
                }
            }
        };
        Ok(Self {
            key,
            transmit_snr,
            threshold,
            alpha,
            law,
            rule,
            contention_radius: rc,
            cutoff,
        })
    }

    /// Same relation with fresh link fades.
    pub fn with_key(&self, key: u64) -> Self {
        Self {
            key,
            ..self.clone()
        }
    }

    /// Distance beyond which two points are never neighbours.
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Unit-mean exponential fade of the unordered link {i, j}.
    pub fn link_fade(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let h = splitmix64(splitmix64(self.key ^ a as u64) ^ (b as u64).rotate_left(32));
        let u = ((h >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
        -u.ln()
    }

    pub fn are_neighbors(&self, i: usize, j: usize, distance: f64) -> bool {
        if i == j {
            return false;
        }
        match self.rule {
            NeighborRule::Radius => distance < self.contention_radius,
            NeighborRule::Sensed => {
                distance < self.cutoff
                    && self.transmit_snr * self.link_fade(i, j)
                        > self.threshold * self.law.attenuation(distance, self.alpha)
            }
        }
    }
}

/// Uniform grid over a point set for neighbour queries within the sensing
/// cutoff. Each cell lists its points by ascending mark.
pub(crate) struct Thinner<'a> {
    points: &'a [[f64; 2]],
    marks: &'a [f64],
    rule: &'a SensingRule,
    origin: f64,
    cell: f64,
    side: usize,
    reach: isize,
    start: Vec<u32>,
    items: Vec<Slot>,
}

#[derive(Clone, Copy)]
struct Slot {
    x: f64,
    y: f64,
    mark: f64,
    index: usize,
}

const MAX_GRID_SIDE: usize = 128;

impl<'a> Thinner<'a> {
    pub(crate) fn new(
        points: &'a [[f64; 2]],
        marks: &'a [f64],
        half_width: f64,
        rule: &'a SensingRule,
    ) -> Self {
        let span = 2.0 * half_width.max(1e-9);
        let cell = rule.cutoff().max(span / MAX_GRID_SIDE as f64).max(1e-9);
        let side = ((span / cell).ceil() as usize).clamp(1, MAX_GRID_SIDE);
        let reach = (rule.cutoff() / cell).ceil() as isize;
        let origin = -half_width;
        let mut counts = vec![0u32; side * side + 1];
        let cells: Vec<usize> = points
            .iter()
            .map(|p| Self::cell_of(origin, cell, side, p))
            .collect();
        for &c in &cells {
            counts[c + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let start = counts.clone();
        let mut fill = counts;
        let blank = Slot {
            x: 0.0,
            y: 0.0,
            mark: 0.0,
            index: 0,
        };
        let mut items = vec![blank; points.len()];
        for (i, &c) in cells.iter().enumerate() {
            items[fill[c] as usize] = Slot {
                x: points[i][0],
                y: points[i][1],
                mark: marks[i],
                index: i,
            };
            fill[c] += 1;
        }
        for c in 0..side * side {
            items[start[c] as usize..start[c + 1] as usize]
                .sort_unstable_by(|a, b| a.mark.total_cmp(&b.mark));
        }
        Self {
            points,
            marks,
            rule,
            origin,
            cell,
            side,
            reach,
            start,
            items,
        }
    }

    fn cell_of(origin: f64, cell: f64, side: usize, p: &[f64; 2]) -> usize {
        let cx = (((p[0] - origin) / cell) as isize).clamp(0, side as isize - 1) as usize;
        let cy = (((p[1] - origin) / cell) as isize).clamp(0, side as isize - 1) as usize;
        cy * side + cx
    }

    fn blocked_by_cell(
        &self,
        i: usize,
        p: [f64; 2],
        mi: f64,
        cut2: f64,
        x: isize,
        y: isize,
    ) -> bool {
        let side = self.side as isize;
        if x < 0 || y < 0 || x >= side || y >= side {
            return false;
        }
        let k = (y * side + x) as usize;
        for q in &self.items[self.start[k] as usize..self.start[k + 1] as usize] {
            if q.mark > mi {
                break;
            }
            if q.index == i {
                continue;
            }
            let d2 = (p[0] - q.x).powi(2) + (p[1] - q.y).powi(2);
            if d2 < cut2 && self.rule.are_neighbors(i, q.index, d2.sqrt()) {
                return true;
            }
        }
        false
    }

    /// True iff no neighbour of point `i` carries a mark at or below its own.
    /// Cells are visited in rings of growing distance so most losers exit early.
    pub(crate) fn is_retained(&self, i: usize) -> bool {
        let p = self.points[i];
        let mi = self.marks[i];
        let cut2 = self.rule.cutoff() * self.rule.cutoff();
        let c = Self::cell_of(self.origin, self.cell, self.side, &p);
        let (cx, cy) = ((c % self.side) as isize, (c / self.side) as isize);
        for ring in 0..=self.reach {
            for dx in -ring..=ring {
                let edge = dx == -ring || dx == ring;
                let step = if edge || ring == 0 { 1 } else { 2 * ring };
                let mut dy = -ring;
                while dy <= ring {
                    if self.blocked_by_cell(i, p, mi, cut2, cx + dx, cy + dy) {
                        return false;
                    }
                    dy += step.max(1);
                }
            }
        }
        true
    }
}

/// Applies the lowest-mark-wins contention rule and sets the retained flags.
pub fn csma_thinning(
    pattern: &PointPattern,
    cfg: &ScenarioConfig,
    stream: &RngStream,
) -> Result<PointPattern> {
    let marks = pattern.marks.as_ref().ok_or(Error::MissingMarks)?;
    let rule = SensingRule::new(cfg, stream.rng().next_u64())?;
    let half = pattern.points.iter().fold(pattern.window_radius, |m, p| {
        m.max(p[0].abs()).max(p[1].abs())
    });
    let thinner = Thinner::new(&pattern.points, marks, half, &rule);
    let retained = (0..pattern.len()).map(|i| thinner.is_retained(i)).collect();
    Ok(PointPattern {
        retained: Some(retained),
        ..pattern.clone()
    })
}
