//! Optical channel model: generalized Lambertian emission, line-of-sight
//! link budget, diffuse-reflection (non-line-of-sight) quadrature, and the
//! maximum-distance calculation they imply.
//!
//! Angles are degrees at every public boundary and radians internally.
//! The link is considered workable when the detector photocurrent clears
//! ten times the receiver noise standard deviation.

use thiserror::Error;

/// Detection threshold: eta * P_r must reach this multiple of sigma_n.
pub const SNR_FACTOR: f64 = 10.0;

/// Far-field validity margin: d^2 must be at least this multiple of the
/// lens area for the solid-angle approximation to hold.
pub const NEAR_FIELD_MARGIN: f64 = 100.0;

#[derive(Debug, Error, PartialEq)]
pub enum OpticsError {
    #[error("parameter out of domain: {0}")]
    Domain(&'static str),
    #[error("distance {distance_m} m is inside the near-field limit {min_distance_m:.3} m")]
    NearField { distance_m: f64, min_distance_m: f64 },
    #[error("quadrature did not converge below {target_rel:.4} relative change at grid {grid}")]
    Resolution { grid: usize, target_rel: f64 },
    #[error("parameter file: {0}")]
    Parse(String),
}

/// Cosine of an angle given in degrees, exactly zero at 90.
fn cos_deg(angle_deg: f64) -> f64 {
    if angle_deg == 90.0 {
        0.0
    } else {
        angle_deg.to_radians().cos()
    }
}

/// Every symbol of the line-of-sight link equations.
///
/// `tx_power_w` is the emitted power driving the link: the level difference
/// for modulated transmissions, the absolute power otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalLinkParams {
    pub half_power_semiangle_deg: f64,
    pub irradiance_angle_deg: f64,
    pub detector_axial_angle_deg: f64,
    pub loss_factor: f64,
    pub lens_radius_m: f64,
    pub responsivity_a_per_w: f64,
    pub noise_sigma_a: f64,
    pub tx_power_w: f64,
    pub distance_m: f64,
}

impl OpticalLinkParams {
    /// Reference values for a high-end camera IR array and a lens receiver.
    pub fn reference() -> Self {
        Self {
            half_power_semiangle_deg: 25.0,
            irradiance_angle_deg: 25.0,
            detector_axial_angle_deg: 5.0,
            loss_factor: 0.8,
            lens_radius_m: 0.025,
            responsivity_a_per_w: 0.5,
            noise_sigma_a: 1e-8,
            tx_power_w: 4.0,
            distance_m: 10.0,
        }
    }

    pub fn validate(&self) -> Result<(), OpticsError> {
        if !(self.half_power_semiangle_deg > 0.0 && self.half_power_semiangle_deg < 90.0) {
            return Err(OpticsError::Domain("half-power semiangle must be in (0, 90) degrees"));
        }
        for angle in [self.irradiance_angle_deg, self.detector_axial_angle_deg] {
            if !(0.0..=90.0).contains(&angle) {
                return Err(OpticsError::Domain("angles must be in [0, 90] degrees"));
            }
        }
        if !(self.loss_factor > 0.0 && self.loss_factor <= 1.0) {
            return Err(OpticsError::Domain("loss factor must be in (0, 1]"));
        }
        if !(self.lens_radius_m > 0.0) {
            return Err(OpticsError::Domain("lens radius must be positive"));
        }
        if !(self.responsivity_a_per_w > 0.0) {
            return Err(OpticsError::Domain("responsivity must be positive"));
        }
        if !(self.noise_sigma_a >= 0.0) {
            return Err(OpticsError::Domain("noise sigma must be non-negative"));
        }
        if !(self.tx_power_w > 0.0) {
            return Err(OpticsError::Domain("transmit power must be positive"));
        }
        if !(self.distance_m > 0.0) {
            return Err(OpticsError::Domain("distance must be positive"));
        }
        Ok(())
    }

    /// Lens aperture area.
    pub fn lens_area_m2(&self) -> f64 {
        std::f64::consts::PI * self.lens_radius_m * self.lens_radius_m
    }
}

/// Lambertian order from the half-power semiangle: m = -1 / log2(cos(phi_half)).
pub fn lambertian_order(half_power_semiangle_deg: f64) -> Result<f64, OpticsError> {
    if !(half_power_semiangle_deg > 0.0 && half_power_semiangle_deg < 90.0) {
        return Err(OpticsError::Domain("half-power semiangle must be in (0, 90) degrees"));
    }
    Ok(-1.0 / cos_deg(half_power_semiangle_deg).log2())
}

/// Generalized Lambertian radiant intensity, in 1/sr:
/// R(phi) = (m + 1) / (2 pi) * cos^m(phi).
pub fn radiant_intensity(irradiance_angle_deg: f64, order: f64) -> f64 {
    let c = cos_deg(irradiance_angle_deg).max(0.0);
    (order + 1.0) / (2.0 * std::f64::consts::PI) * c.powf(order)
}

/// Approximated solid angle of the receiver lens seen from the source:
/// Omega = pi R_l^2 / d^2, valid only well into the far field.
pub fn solid_angle(lens_radius_m: f64, distance_m: f64) -> Result<f64, OpticsError> {
    if !(lens_radius_m > 0.0 && distance_m > 0.0) {
        return Err(OpticsError::Domain("lens radius and distance must be positive"));
    }
    let lens_area = std::f64::consts::PI * lens_radius_m * lens_radius_m;
    let min_distance_m = (NEAR_FIELD_MARGIN * lens_area).sqrt();
    if distance_m * distance_m < NEAR_FIELD_MARGIN * lens_area {
        return Err(OpticsError::NearField { distance_m, min_distance_m });
    }
    Ok(lens_area / (distance_m * distance_m))
}

/// Line-of-sight received power: P_r = P_t R(phi) Omega L cos(varphi).
pub fn received_power_los(p: &OpticalLinkParams) -> Result<f64, OpticsError> {
    p.validate()?;
    let order = lambertian_order(p.half_power_semiangle_deg)?;
    let intensity = radiant_intensity(p.irradiance_angle_deg, order);
    let omega = solid_angle(p.lens_radius_m, p.distance_m)?;
    Ok(p.tx_power_w * intensity * omega * p.loss_factor * cos_deg(p.detector_axial_angle_deg))
}

/// Receiver photocurrent: i_r = eta P_r + i_n, with the noise sample drawn
/// by the caller (zero-mean Gaussian of std sigma_n in the model).
pub fn received_current(received_power_w: f64, responsivity_a_per_w: f64, noise_a: f64) -> f64 {
    responsivity_a_per_w * received_power_w + noise_a
}

/// Detection condition for a workably low bit error rate: eta P_r >= 10 sigma_n.
pub fn snr_ok(received_power_w: f64, responsivity_a_per_w: f64, noise_sigma_a: f64) -> bool {
    responsivity_a_per_w * received_power_w >= SNR_FACTOR * noise_sigma_a
}

/// Maximum line-of-sight distance at which the detection condition holds:
///
/// d = R_l cos^(m/2)(phi) sqrt(eta P_t L cos(varphi) (m + 1) / (20 sigma_n)).
pub fn max_distance_los(p: &OpticalLinkParams) -> Result<f64, OpticsError> {
    p.validate()?;
    if !(p.noise_sigma_a > 0.0) {
        return Err(OpticsError::Domain("noise sigma must be positive for distance solving"));
    }
    let order = lambertian_order(p.half_power_semiangle_deg)?;
    let arg = p.responsivity_a_per_w
        * p.tx_power_w
        * p.loss_factor
        * cos_deg(p.detector_axial_angle_deg)
        * (order + 1.0)
        / (2.0 * SNR_FACTOR * p.noise_sigma_a);
    Ok(p.lens_radius_m * cos_deg(p.irradiance_angle_deg).powf(order / 2.0) * arg.sqrt())
}

/// One point of a distance sweep over the two link angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub irradiance_angle_deg: f64,
    pub detector_axial_angle_deg: f64,
    pub max_distance_m: f64,
}

/// Evaluates the maximum distance over a grid of irradiance and detector
/// angles. Either range may be a single point.
pub fn distance_sweep(
    p: &OpticalLinkParams,
    irradiance_angles_deg: &[f64],
    detector_angles_deg: &[f64],
) -> Result<Vec<SweepPoint>, OpticsError> {
    let mut points = Vec::with_capacity(irradiance_angles_deg.len() * detector_angles_deg.len());
    for &phi in irradiance_angles_deg {
        for &varphi in detector_angles_deg {
            let mut q = p.clone();
            q.irradiance_angle_deg = phi;
            q.detector_axial_angle_deg = varphi;
            points.push(SweepPoint {
                irradiance_angle_deg: phi,
                detector_axial_angle_deg: varphi,
                max_distance_m: max_distance_los(&q)?,
            });
        }
    }
    Ok(points)
}

/// Geometry of a diffuse-reflection path: source -> surface patch -> detector.
///
/// The patch lies in the z = 0 plane, centered at the origin with normal +z.
/// The source sits at distance `d1_m` along a ray tilted `incidence_angle_deg`
/// from the normal, the detector at `d2_m` tilted `reflection_angle_deg` on
/// the opposite side; both are aimed at the patch center.
#[derive(Debug, Clone, PartialEq)]
pub struct NlosGeometry {
    pub d1_m: f64,
    pub d2_m: f64,
    pub incidence_angle_deg: f64,
    pub reflection_angle_deg: f64,
    pub reflectance: f64,
    pub patch_width_m: f64,
    pub patch_height_m: f64,
    /// Quadrature cells per patch axis.
    pub grid: usize,
}

impl NlosGeometry {
    /// Floodlit ground/wall patch in front of a camera.
    pub fn reference() -> Self {
        Self {
            d1_m: 5.0,
            d2_m: 10.0,
            incidence_angle_deg: 45.0,
            reflection_angle_deg: 45.0,
            reflectance: 0.5,
            patch_width_m: 4.0,
            patch_height_m: 4.0,
            grid: 64,
        }
    }

    pub fn validate(&self) -> Result<(), OpticsError> {
        if !(self.d1_m > 0.0 && self.d2_m > 0.0) {
            return Err(OpticsError::Domain("reflection path distances must be positive"));
        }
        if !(0.0..=1.0).contains(&self.reflectance) {
            return Err(OpticsError::Domain("reflectance must be in [0, 1]"));
        }
        for angle in [self.incidence_angle_deg, self.reflection_angle_deg] {
            if !(0.0..90.0).contains(&angle) {
                return Err(OpticsError::Domain("reflection angles must be in [0, 90) degrees"));
            }
        }
        if !(self.patch_width_m > 0.0 && self.patch_height_m > 0.0) {
            return Err(OpticsError::Domain("patch extent must be positive"));
        }
        if self.grid < 8 {
            return Err(OpticsError::Domain("quadrature grid must be at least 8x8"));
        }
        Ok(())
    }
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Diffuse-reflection received power by midpoint quadrature over the patch:
///
/// P_r = P_t * sum over cells of
///   R_l^2 rho (m+1)/(4 pi) cos^m(phi) cos(alpha) cos(beta) cos(varphi)
///   / (D1^2 D2^2) * dA
///
/// with all angles and distances evaluated per cell. Deterministic for a
/// fixed grid.
pub fn received_power_nlos(p: &OpticalLinkParams, g: &NlosGeometry) -> Result<f64, OpticsError> {
    p.validate()?;
    g.validate()?;
    let order = lambertian_order(p.half_power_semiangle_deg)?;

    let alpha = g.incidence_angle_deg.to_radians();
    let beta = g.reflection_angle_deg.to_radians();
    let source = [g.d1_m * alpha.sin(), 0.0, g.d1_m * alpha.cos()];
    let detector = [-g.d2_m * beta.sin(), 0.0, g.d2_m * beta.cos()];
    // Both optical axes point at the patch center (the origin).
    let source_axis = [-source[0] / g.d1_m, 0.0, -source[2] / g.d1_m];
    let detector_axis = [-detector[0] / g.d2_m, 0.0, -detector[2] / g.d2_m];

    let nx = g.grid;
    let ny = g.grid;
    let dx = g.patch_width_m / nx as f64;
    let dy = g.patch_height_m / ny as f64;
    let cell_area = dx * dy;
    let constant = p.tx_power_w
        * p.lens_radius_m
        * p.lens_radius_m
        * g.reflectance
        * (order + 1.0)
        / (4.0 * std::f64::consts::PI);

    let mut sum = 0.0;
    for ix in 0..nx {
        let x = -g.patch_width_m / 2.0 + (ix as f64 + 0.5) * dx;
        for iy in 0..ny {
            let y = -g.patch_height_m / 2.0 + (iy as f64 + 0.5) * dy;
            let point = [x, y, 0.0];

            let to_point = [point[0] - source[0], point[1] - source[1], point[2] - source[2]];
            let d1 = norm3(to_point);
            let dir1 = [to_point[0] / d1, to_point[1] / d1, to_point[2] / d1];
            let cos_phi = dot3(dir1, source_axis).max(0.0);
            // Incidence measured from the surface normal (+z).
            let cos_alpha = (-dir1[2]).max(0.0);

            let to_detector = [
                detector[0] - point[0],
                detector[1] - point[1],
                detector[2] - point[2],
            ];
            let d2 = norm3(to_detector);
            let dir2 = [to_detector[0] / d2, to_detector[1] / d2, to_detector[2] / d2];
            let cos_beta = dir2[2].max(0.0);
            let cos_varphi = dot3(
                [-dir2[0], -dir2[1], -dir2[2]],
                detector_axis,
            )
            .max(0.0);

            sum += cos_phi.powf(order) * cos_alpha * cos_beta * cos_varphi
                / (d1 * d1 * d2 * d2)
                * cell_area;
        }
    }
    Ok(constant * sum)
}

/// Result of adaptive grid refinement of the reflection quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlosQuadrature {
    pub power_w: f64,
    pub grid: usize,
    /// Relative change over the last grid doubling.
    pub rel_change: f64,
}

/// Refines the quadrature grid (doubling per step) until the result moves by
/// less than 0.5% over a doubling, starting from `g.grid`.
pub fn received_power_nlos_converged(
    p: &OpticalLinkParams,
    g: &NlosGeometry,
) -> Result<NlosQuadrature, OpticsError> {
    const TARGET_REL: f64 = 0.005;
    const MAX_GRID: usize = 1024;
    let mut geom = g.clone();
    let mut previous = received_power_nlos(p, &geom)?;
    while geom.grid < MAX_GRID {
        geom.grid *= 2;
        let current = received_power_nlos(p, &geom)?;
        let rel_change = if current == 0.0 {
            0.0
        } else {
            ((current - previous) / current).abs()
        };
        if rel_change < TARGET_REL {
            return Ok(NlosQuadrature { power_w: current, grid: geom.grid, rel_change });
        }
        previous = current;
    }
    Err(OpticsError::Resolution { grid: geom.grid, target_rel: TARGET_REL })
}

/// Largest detector distance D2 at which the reflection path still meets the
/// detection condition, holding everything else fixed. Returns `None` when
/// even the closest probe distance fails.
pub fn nlos_effective_range(
    p: &OpticalLinkParams,
    g: &NlosGeometry,
) -> Result<Option<f64>, OpticsError> {
    let meets = |d2: f64| -> Result<bool, OpticsError> {
        let mut geom = g.clone();
        geom.d2_m = d2;
        let power = received_power_nlos(p, &geom)?;
        Ok(snr_ok(power, p.responsivity_a_per_w, p.noise_sigma_a))
    };
    let mut lo = 0.1;
    let mut hi = 500.0;
    if !meets(lo)? {
        return Ok(None);
    }
    if meets(hi)? {
        return Ok(Some(hi));
    }
    // Received power falls off monotonically with detector distance here.
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if meets(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(lo))
}

// ---------------------------------------------------------------------------
// Link parameter files: one `symbol = value [unit]` per line.
// ---------------------------------------------------------------------------

fn convert_unit(value: f64, unit: &str, key: &str) -> Result<f64, OpticsError> {
    match unit {
        "" => Ok(value),
        "deg" => Ok(value),
        "rad" => Ok(value.to_degrees()),
        "m" => Ok(value),
        "cm" => Ok(value / 100.0),
        "mm" => Ok(value / 1000.0),
        "W" => Ok(value),
        "A" => Ok(value),
        "A/W" => Ok(value),
        other => Err(OpticsError::Parse(format!("unknown unit '{other}' for {key}"))),
    }
}

/// Parses a flat key-value link parameter file. Keys mirror the link-budget
/// symbols (`phi_half`, `phi`, `varphi`, `L`, `R_l`, `eta`, `sigma_n`, `P_t`,
/// `d`); descriptive aliases are accepted. `#` starts a comment.
pub fn parse_link_params(text: &str) -> Result<OpticalLinkParams, OpticsError> {
    let mut params = OpticalLinkParams::reference();
    let mut seen = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line
            .split_once('=')
            .ok_or_else(|| OpticsError::Parse(format!("line {}: expected key = value", lineno + 1)))?;
        let key = key.trim();
        let mut parts = rest.split_whitespace();
        let value: f64 = parts
            .next()
            .ok_or_else(|| OpticsError::Parse(format!("line {}: missing value", lineno + 1)))?
            .parse()
            .map_err(|_| OpticsError::Parse(format!("line {}: bad number", lineno + 1)))?;
        let unit = parts.next().unwrap_or("");
        if parts.next().is_some() {
            return Err(OpticsError::Parse(format!("line {}: trailing tokens", lineno + 1)));
        }
        let value = convert_unit(value, unit, key)?;
        match key {
            "phi_half" | "half_power_semiangle" => params.half_power_semiangle_deg = value,
            "phi" | "irradiance_angle" => params.irradiance_angle_deg = value,
            "varphi" | "detector_angle" | "detector_axial_angle" => {
                params.detector_axial_angle_deg = value
            }
            "L" | "loss" | "loss_factor" => params.loss_factor = value,
            "R_l" | "R_t" | "lens_radius" => params.lens_radius_m = value,
            "eta" | "responsivity" => params.responsivity_a_per_w = value,
            "sigma_n" | "noise_sigma" => params.noise_sigma_a = value,
            "P_t" | "dP_t" | "tx_power" => params.tx_power_w = value,
            "d" | "distance" => params.distance_m = value,
            other => return Err(OpticsError::Parse(format!("unknown key '{other}'"))),
        }
        seen.push(key.to_string());
    }
    params.validate()?;
    Ok(params)
}

/// Serializes link parameters in the same flat key-value form.
pub fn link_params_to_text(p: &OpticalLinkParams) -> String {
    format!(
        "phi_half = {} deg\nphi = {} deg\nvarphi = {} deg\nL = {}\nR_l = {} m\neta = {} A/W\nsigma_n = {} A\nP_t = {} W\nd = {} m\n",
        p.half_power_semiangle_deg,
        p.irradiance_angle_deg,
        p.detector_axial_angle_deg,
        p.loss_factor,
        p.lens_radius_m,
        p.responsivity_a_per_w,
        p.noise_sigma_a,
        p.tx_power_w,
        p.distance_m,
    )
}
