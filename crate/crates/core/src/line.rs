//! Transmission line constants and long-line equivalent circuits.
//!
//! Per-km constants come from a transposed three-phase tower with circular
//! conductor bundles. Long circuits are reduced to an exact equivalent π
//! using the hyperbolic correction factors; [`cascaded_segment_oracle`]
//! reaches the same model by chaining short nominal-π sections and is kept
//! as an independent check.

use alloc::string::String;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;

/// Permittivity of free space, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

/// μ0 / 2π, H/m.
const MU0_OVER_2PI: f64 = 2.0e-7;

pub const KM_PER_MILE: f64 = 1.609_344;

/// Below this |γl| the hyperbolic ratios are evaluated by series.
const SERIES_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub enum LineError {
    CoincidentPhases { a: usize, b: usize },
    InvalidConductor(&'static str),
    InvalidTower(&'static str),
}

impl fmt::Display for LineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LineError::CoincidentPhases { a, b } => {
                write!(
                    f,
                    "degenerate geometry: phases {} and {} coincide",
                    a + 1,
                    b + 1
                )
            }
            LineError::InvalidConductor(msg) => write!(f, "invalid conductor: {msg}"),
            LineError::InvalidTower(msg) => write!(f, "invalid tower: {msg}"),
        }
    }
}

impl core::error::Error for LineError {}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConductorSpec {
    pub name: String,
    pub outer_diameter_m: f64,
    /// AC resistance of one sub-conductor at operating temperature.
    pub resistance_ohm_per_km: f64,
    pub ampacity_a: f64,
    /// Self geometric mean radius; `r·e^(-1/4)` when absent.
    pub gmr_m: Option<f64>,
}

impl ConductorSpec {
    pub fn radius_m(&self) -> f64 {
        self.outer_diameter_m / 2.0
    }

    pub fn self_gmr_m(&self) -> f64 {
        self.gmr_m
            .unwrap_or_else(|| self.radius_m() * (-0.25f64).exp())
    }

    pub fn check(&self) -> Result<(), LineError> {
        let positive = [
            self.outer_diameter_m,
            self.resistance_ohm_per_km,
            self.ampacity_a,
        ];
        if positive.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(LineError::InvalidConductor(
                "diameter, resistance and ampacity must be positive",
            ));
        }
        if let Some(gmr) = self.gmr_m {
            if !(gmr > 0.0) || gmr >= self.radius_m() {
                return Err(LineError::InvalidConductor(
                    "gmr must lie in (0, outer radius)",
                ));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TowerGeometry {
    /// (x, y) of the three phase bundle centres, m.
    pub phase_positions: [(f64, f64); 3],
    pub bundle_count: u32,
    /// Distance between adjacent sub-conductors of a bundle, m.
    pub bundle_spacing_m: f64,
}

impl TowerGeometry {
    pub fn check(&self) -> Result<(), LineError> {
        if self.bundle_count == 0 {
            return Err(LineError::InvalidTower("bundle count must be at least 1"));
        }
        if self.bundle_count > 1 && !(self.bundle_spacing_m > 0.0) {
            return Err(LineError::InvalidTower("bundle spacing must be positive"));
        }
        if self.phase_positions.iter().any(|&(_, y)| !(y > 0.0)) {
            return Err(LineError::InvalidTower("phase heights must be positive"));
        }
        for (a, b) in [(0, 1), (1, 2), (0, 2)] {
            if self.phase_distance(a, b) <= 0.0 {
                return Err(LineError::CoincidentPhases { a, b });
            }
        }
        Ok(())
    }

    fn phase_distance(&self, a: usize, b: usize) -> f64 {
        let (xa, ya) = self.phase_positions[a];
        let (xb, yb) = self.phase_positions[b];
        (xa - xb).hypot(ya - yb)
    }

    /// Geometric mean of the three phase-to-phase distances.
    pub fn gmd_m(&self) -> Result<f64, LineError> {
        let mut product = 1.0;
        for (a, b) in [(0, 1), (1, 2), (0, 2)] {
            let d = self.phase_distance(a, b);
            if d <= 0.0 {
                return Err(LineError::CoincidentPhases { a, b });
            }
            product *= d;
        }
        Ok(product.cbrt())
    }

    /// Radius of the circle through the sub-conductor centres.
    pub fn bundle_radius_m(&self) -> f64 {
        match self.bundle_count {
            0 | 1 => 0.0,
            b => self.bundle_spacing_m / (2.0 * (PI / b as f64).sin()),
        }
    }

    /// Equivalent radius of the bundle for a sub-conductor of radius `r`:
    /// `(b·r·A^(b-1))^(1/b)`.
    pub fn bundle_equivalent_radius(&self, r: f64) -> f64 {
        let b = self.bundle_count.max(1) as f64;
        if self.bundle_count <= 1 {
            return r;
        }
        let a = self.bundle_radius_m();
        (b * r * a.powf(b - 1.0)).powf(1.0 / b)
    }
}

/// Per-km series and shunt constants of one circuit.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UnitLineParams {
    pub r_ohm_per_km: f64,
    pub x_ohm_per_km: f64,
    pub b_siemens_per_km: f64,
    pub g_siemens_per_km: f64,
}

impl UnitLineParams {
    /// Builds the constants from R (Ω/km), L (mH/km) and C (nF/km).
    pub fn from_rlc(r_ohm_per_km: f64, l_mh_per_km: f64, c_nf_per_km: f64, f_hz: f64) -> Self {
        let w = 2.0 * PI * f_hz;
        UnitLineParams {
            r_ohm_per_km,
            x_ohm_per_km: w * l_mh_per_km * 1e-3,
            b_siemens_per_km: w * c_nf_per_km * 1e-9,
            g_siemens_per_km: 0.0,
        }
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.r_ohm_per_km, self.x_ohm_per_km)
    }

    pub fn y(&self) -> Complex64 {
        Complex64::new(self.g_siemens_per_km, self.b_siemens_per_km)
    }

    pub fn inductance_mh_per_km(&self, f_hz: f64) -> f64 {
        self.x_ohm_per_km / (2.0 * PI * f_hz) * 1e3
    }

    pub fn capacitance_nf_per_km(&self, f_hz: f64) -> f64 {
        self.b_siemens_per_km / (2.0 * PI * f_hz) * 1e9
    }

    /// Propagation constant γ = √(zy), per km.
    pub fn propagation_constant(&self) -> Complex64 {
        (self.z() * self.y()).sqrt()
    }
}

/// Two-terminal π equivalent of one circuit.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PiModel {
    /// Series impedance Z′, Ω.
    pub z_series: Complex64,
    /// Total shunt admittance Y′, S. Half sits at each terminal.
    pub y_shunt: Complex64,
    /// Operational rating per circuit, MVA.
    pub rating_mva: f64,
    pub length_km: f64,
}

/// Per-km constants of a transposed line (Ω/km and S/km).
///
/// The inductive radius uses the sub-conductor GMR and the capacitive radius
/// its physical radius, each folded into the bundle equivalent.
pub fn unit_parameters(
    tower: &TowerGeometry,
    cond: &ConductorSpec,
    f_hz: f64,
) -> Result<UnitLineParams, LineError> {
    tower.check()?;
    cond.check()?;
    let gmd = tower.gmd_m()?;
    let r_inductive = tower.bundle_equivalent_radius(cond.self_gmr_m());
    let r_capacitive = tower.bundle_equivalent_radius(cond.radius_m());
    if gmd <= r_capacitive {
        return Err(LineError::InvalidTower(
            "phase spacing smaller than the bundle radius",
        ));
    }
    let w = 2.0 * PI * f_hz;
    let x_per_m = w * MU0_OVER_2PI * (gmd / r_inductive).ln();
    let b_per_m = w * 2.0 * PI * VACUUM_PERMITTIVITY / (gmd / r_capacitive).ln();
    Ok(UnitLineParams {
        r_ohm_per_km: cond.resistance_ohm_per_km / tower.bundle_count as f64,
        x_ohm_per_km: x_per_m * 1e3,
        b_siemens_per_km: b_per_m * 1e3,
        g_siemens_per_km: 0.0,
    })
}

fn sinh_ratio(x: Complex64) -> Complex64 {
    if x.norm() < SERIES_THRESHOLD {
        let x2 = x * x;
        Complex64::new(1.0, 0.0) + x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sinh() / x
    }
}

/// tanh(x/2)/(x/2).
fn half_tanh_ratio(x: Complex64) -> Complex64 {
    if x.norm() < SERIES_THRESHOLD {
        let x2 = x * x;
        Complex64::new(1.0, 0.0) - x2 / 12.0 + x2 * x2 / 120.0
    } else {
        let h = x / 2.0;
        h.tanh() / h
    }
}

/// Exact equivalent π of a distributed-parameter line of `length_km`.
pub fn equivalent_pi(u: &UnitLineParams, length_km: f64, rating_mva: f64) -> PiModel {
    let gl = u.propagation_constant() * length_km;
    PiModel {
        z_series: u.z() * length_km * sinh_ratio(gl),
        y_shunt: u.y() * length_km * half_tanh_ratio(gl),
        rating_mva,
        length_km,
    }
}

/// Nominal (lumped) π: z·l and y·l.
pub fn nominal_pi(u: &UnitLineParams, length_km: f64, rating_mva: f64) -> PiModel {
    PiModel {
        z_series: u.z() * length_km,
        y_shunt: u.y() * length_km,
        rating_mva,
        length_km,
    }
}

/// Percentage differences between lumped and distributed R, X and B.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParameterGap {
    pub r_pct: f64,
    pub x_pct: f64,
    pub b_pct: f64,
}

/// How far the naive z·l, y·l estimates sit from the equivalent-π values,
/// as `100·|lumped − distributed| / distributed` per component.
pub fn lumped_distributed_gap(u: &UnitLineParams, length_km: f64) -> ParameterGap {
    if length_km <= 0.0 {
        return ParameterGap {
            r_pct: 0.0,
            x_pct: 0.0,
            b_pct: 0.0,
        };
    }
    let lumped = nominal_pi(u, length_km, 0.0);
    let exact = equivalent_pi(u, length_km, 0.0);
    let pct = |l: f64, d: f64| {
        if d == 0.0 {
            0.0
        } else {
            100.0 * (l - d).abs() / d.abs()
        }
    };
    ParameterGap {
        r_pct: pct(lumped.z_series.re, exact.z_series.re),
        x_pct: pct(lumped.z_series.im, exact.z_series.im),
        b_pct: pct(lumped.y_shunt.im, exact.y_shunt.im),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ThermalRating {
    pub thermal_mva: f64,
    pub rating_mva: f64,
}

/// `√3·V·I·b`, and the operational rating at `loading_cap` of it.
pub fn thermal_rating(
    line_kv: f64,
    cond: &ConductorSpec,
    bundle_count: u32,
    loading_cap: f64,
) -> ThermalRating {
    let thermal_mva = 3f64.sqrt() * line_kv * cond.ampacity_a * bundle_count as f64 / 1e3;
    ThermalRating {
        thermal_mva,
        rating_mva: loading_cap * thermal_mva,
    }
}

/// Chain (transmission) matrix of a two-port.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Abcd {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Abcd {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Abcd {
            a: one,
            b: zero,
            c: zero,
            d: one,
        }
    }

    pub fn from_pi(z: Complex64, y: Complex64) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let a = one + z * y / 2.0;
        Abcd {
            a,
            b: z,
            c: y * (one + z * y / 4.0),
            d: a,
        }
    }

    pub fn then(&self, next: &Abcd) -> Abcd {
        Abcd {
            a: self.a * next.a + self.b * next.c,
            b: self.a * next.b + self.b * next.d,
            c: self.c * next.a + self.d * next.c,
            d: self.c * next.b + self.d * next.d,
        }
    }

    /// Symmetric π that realises this two-port: Z′ = B, Y′ = 2(A − 1)/B.
    pub fn to_pi(&self) -> (Complex64, Complex64) {
        let z = self.b;
        let y = (self.a - Complex64::new(1.0, 0.0)) * 2.0 / z;
        (z, y)
    }
}

/// Equivalent π obtained by cascading `n_segments` nominal-π sections.
///
/// Converges to [`equivalent_pi`] with second-order error in the section
/// length. `n_segments = 1` is the nominal π.
pub fn cascaded_segment_oracle(
    u: &UnitLineParams,
    length_km: f64,
    n_segments: usize,
    rating_mva: f64,
) -> PiModel {
    let n = n_segments.max(1);
    if n == 1 {
        return nominal_pi(u, length_km, rating_mva);
    }
    let dl = length_km / n as f64;
    let section = Abcd::from_pi(u.z() * dl, u.y() * dl);
    // Square-and-multiply keeps the rounding error at O(log n) products.
    let mut result = Abcd::identity();
    let mut base = section;
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            result = result.then(&base);
        }
        base = base.then(&base);
        k >>= 1;
    }
    let (z, y) = result.to_pi();
    PiModel {
        z_series: z,
        y_shunt: y,
        rating_mva,
        length_km,
    }
}
