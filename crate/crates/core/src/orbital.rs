//! Circular Keplerian orbits, ground-station kinematics and access windows.
//!
//! All geometry lives in an Earth-centred inertial frame. At `t = 0` the
//! first satellite of orbit 0 sits on the ascending node with right ascension
//! 0 (the +x axis), and the ground station sits at its geographic longitude
//! measured from the same axis. The Earth is a sphere rotating at `ω_E`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cross, dot, norm, sub, Scalar, Vec3};

/// Physical constants of the Earth model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants<T> {
    /// Standard gravitational parameter `G·M` (m³/s²).
    pub gm: T,
    /// Mean Earth radius (m).
    pub earth_radius: T,
    /// Sidereal rotation rate (rad/s).
    pub earth_rotation_rate: T,
    /// Speed of light (m/s).
    pub light_speed: T,
    /// Boltzmann constant (J/K).
    pub boltzmann: T,
}

impl<T: Scalar> Default for PhysicalConstants<T> {
    fn default() -> Self {
        Self {
            gm: T::lit(3.986004418e14),
            earth_radius: T::lit(6_371_000.0),
            earth_rotation_rate: T::lit(7.2921159e-5),
            light_speed: T::lit(299_792_458.0),
            boltzmann: T::lit(1.380649e-23),
        }
    }
}

impl<T: Scalar> PhysicalConstants<T> {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("gm", self.gm),
            ("earth_radius", self.earth_radius),
            ("earth_rotation_rate", self.earth_rotation_rate),
            ("light_speed", self.light_speed),
            ("boltzmann", self.boltzmann),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::Invalid(format!("constant {name} must be > 0")));
            }
        }
        Ok(())
    }

    /// Orbital period `2π·√((R_E+h)³/μ)` in seconds.
    pub fn orbital_period(&self, altitude: T) -> Result<T> {
        check_altitude(altitude)?;
        let r = self.earth_radius + altitude;
        Ok(T::TAU() * (r * r * r / self.gm).sqrt())
    }

    /// Circular orbital speed `√(μ/(R_E+h))` in m/s.
    pub fn orbital_velocity(&self, altitude: T) -> Result<T> {
        check_altitude(altitude)?;
        Ok((self.gm / (self.earth_radius + altitude)).sqrt())
    }

    /// Distance from a ground station to a satellite at `altitude` seen at
    /// `elevation` above the horizon.
    pub fn slant_range(&self, altitude: T, elevation: T) -> T {
        let re = self.earth_radius;
        let r = re + altitude;
        let c = re * elevation.cos();
        (r * r - c * c).sqrt() - re * elevation.sin()
    }
}

fn check_altitude<T: Scalar>(altitude: T) -> Result<()> {
    if altitude > T::zero() && altitude.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("altitude must be positive, got {altitude}")))
    }
}

/// Satellite identifier: orbit (plane) index and in-plane slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SatId {
    pub orbit: usize,
    pub slot: usize,
}

impl SatId {
    pub fn new(orbit: usize, slot: usize) -> Self {
        Self { orbit, slot }
    }
}

impl fmt::Display for SatId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sat-{}-{}", self.orbit, self.slot)
    }
}

/// Walker-delta constellation geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstellationSpec<T> {
    pub num_orbits: usize,
    pub sats_per_orbit: usize,
    /// Altitude of each orbit (m).
    pub altitudes: Vec<T>,
    /// Inclination of each orbit (rad).
    pub inclinations: Vec<T>,
    /// Total right-ascension span; orbit `l` sits at `raan_spread·l/L`.
    pub raan_spread: T,
    /// In-plane phase added per orbit index.
    pub phasing_offset: T,
}

impl<T: Scalar> ConstellationSpec<T> {
    /// Uniform Walker-delta pattern: RAAN spread π and phasing `2π·F/(L·K)`
    /// with `F = 1`.
    pub fn walker_delta(num_orbits: usize, sats_per_orbit: usize, altitude: T, inclination: T) -> Self {
        let total = T::count(num_orbits.max(1) * sats_per_orbit.max(1));
        Self {
            num_orbits,
            sats_per_orbit,
            altitudes: vec![altitude; num_orbits],
            inclinations: vec![inclination; num_orbits],
            raan_spread: T::PI(),
            phasing_offset: T::TAU() / total,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_orbits < 1 {
            return Err(Error::Invalid("num_orbits L must be >= 1".into()));
        }
        if self.sats_per_orbit < 1 {
            return Err(Error::Invalid("sats_per_orbit K must be >= 1".into()));
        }
        if self.altitudes.len() != self.num_orbits || self.inclinations.len() != self.num_orbits {
            return Err(Error::Invalid(
                "altitudes and inclinations need one entry per orbit".into(),
            ));
        }
        if let Some(h) = self.altitudes.iter().find(|h| !(**h > T::zero() && h.is_finite())) {
            return Err(Error::Invalid(format!("altitude h_l must be > 0, got {h}")));
        }
        if let Some(a) = self
            .inclinations
            .iter()
            .find(|a| !(**a >= T::zero() && **a <= T::FRAC_PI_2()))
        {
            return Err(Error::Invalid(format!(
                "inclination alpha_l must lie in [0, pi/2], got {a}"
            )));
        }
        if !self.raan_spread.is_finite() || !self.phasing_offset.is_finite() {
            return Err(Error::Invalid("raan_spread and phasing_offset must be finite".into()));
        }
        Ok(())
    }

    pub fn num_satellites(&self) -> usize {
        self.num_orbits * self.sats_per_orbit
    }

    /// All satellites in (orbit, slot) order.
    pub fn satellites(&self) -> impl Iterator<Item = SatId> + '_ {
        (0..self.num_orbits)
            .flat_map(move |o| (0..self.sats_per_orbit).map(move |s| SatId::new(o, s)))
    }

    /// Dense index of a satellite in (orbit, slot) order.
    pub fn index_of(&self, id: SatId) -> usize {
        id.orbit * self.sats_per_orbit + id.slot
    }

    pub fn check(&self, id: SatId) -> Result<()> {
        if id.orbit >= self.num_orbits {
            return Err(Error::IndexOutOfRange {
                what: "orbit",
                index: id.orbit,
                limit: self.num_orbits,
            });
        }
        if id.slot >= self.sats_per_orbit {
            return Err(Error::IndexOutOfRange {
                what: "slot",
                index: id.slot,
                limit: self.sats_per_orbit,
            });
        }
        Ok(())
    }

    pub fn raan(&self, orbit: usize) -> T {
        self.raan_spread * T::count(orbit) / T::count(self.num_orbits)
    }
}

/// Inertial position of a satellite at time `t` (s).
pub fn satellite_position<T: Scalar>(
    spec: &ConstellationSpec<T>,
    consts: &PhysicalConstants<T>,
    id: SatId,
    t: T,
) -> Result<Vec3<T>> {
    spec.check(id)?;
    let altitude = spec.altitudes[id.orbit];
    let r = consts.earth_radius + altitude;
    let period = consts.orbital_period(altitude)?;
    let slot_phase = T::TAU() * T::count(id.slot) / T::count(spec.sats_per_orbit);
    let u = slot_phase + spec.phasing_offset * T::count(id.orbit) + T::TAU() * (t / period);
    let (su, cu) = u.sin_cos();
    let (si, ci) = spec.inclinations[id.orbit].sin_cos();
    let (so, co) = spec.raan(id.orbit).sin_cos();
    Ok([
        r * (co * cu - so * su * ci),
        r * (so * cu + co * su * ci),
        r * su * si,
    ])
}

/// Ground station on the rotating spherical Earth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundStation<T> {
    /// Geodetic latitude (rad).
    pub latitude: T,
    /// Longitude at epoch, measured from the inertial +x axis (rad).
    pub longitude: T,
    /// Minimum elevation angle ϑ_min (rad).
    pub min_elevation: T,
}

impl<T: Scalar> GroundStation<T> {
    /// Rolla, Missouri: 37.9514° N, 91.7713° W.
    pub fn rolla(min_elevation: T) -> Self {
        Self {
            latitude: T::lit(37.9514).to_radians(),
            longitude: T::lit(-91.7713).to_radians(),
            min_elevation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.latitude.abs() <= T::FRAC_PI_2()) {
            return Err(Error::Invalid(format!(
                "ground station |latitude| must be <= pi/2, got {}",
                self.latitude
            )));
        }
        if !self.longitude.is_finite() {
            return Err(Error::Invalid("ground station longitude must be finite".into()));
        }
        if !(self.min_elevation >= T::zero() && self.min_elevation < T::FRAC_PI_2()) {
            return Err(Error::Invalid(format!(
                "min_elevation must lie in [0, pi/2), got {}",
                self.min_elevation
            )));
        }
        Ok(())
    }
}

/// Inertial position of the ground station at time `t` (s).
pub fn ground_station_position<T: Scalar>(
    gs: &GroundStation<T>,
    consts: &PhysicalConstants<T>,
    t: T,
) -> Vec3<T> {
    let theta = gs.longitude + consts.earth_rotation_rate * t;
    let (sl, cl) = gs.latitude.sin_cos();
    let (st, ct) = theta.sin_cos();
    let re = consts.earth_radius;
    [re * cl * ct, re * cl * st, re * sl]
}

/// Angle between the station's zenith `r_g` and the line of sight `r_k − r_g`.
pub fn zenith_angle<T: Scalar>(sat_pos: &Vec3<T>, gs_pos: &Vec3<T>) -> Result<T> {
    let los = sub(sat_pos, gs_pos);
    if norm(gs_pos) <= T::zero() {
        return Err(Error::domain("ground station position has zero norm"));
    }
    if norm(&los) <= T::zero() {
        return Err(Error::domain("satellite and ground station positions coincide"));
    }
    Ok(norm(&cross(gs_pos, &los)).atan2(dot(gs_pos, &los)))
}

/// Elevation of the satellite above the station's horizon (rad).
pub fn elevation<T: Scalar>(sat_pos: &Vec3<T>, gs_pos: &Vec3<T>) -> Result<T> {
    Ok(T::FRAC_PI_2() - zenith_angle(sat_pos, gs_pos)?)
}

/// Line-of-sight test: zenith angle `≤ π/2 − ϑ_min` (closed inequality).
pub fn elevation_visible<T: Scalar>(sat_pos: &Vec3<T>, gs_pos: &Vec3<T>, min_elevation: T) -> Result<bool> {
    Ok(zenith_angle(sat_pos, gs_pos)? <= T::FRAC_PI_2() - min_elevation)
}

/// Euclidean satellite-to-station distance at time `t`.
pub fn slant_distance<T: Scalar>(
    spec: &ConstellationSpec<T>,
    gs: &GroundStation<T>,
    consts: &PhysicalConstants<T>,
    id: SatId,
    t: T,
) -> Result<T> {
    let s = satellite_position(spec, consts, id, t)?;
    let g = ground_station_position(gs, consts, t);
    Ok(norm(&sub(&s, &g)))
}

/// Minimal number of intra-plane ISL hops between two slots of a K-ring.
pub fn ring_hop_distance(slot_a: usize, slot_b: usize, sats_per_orbit: usize) -> usize {
    let d = slot_a.abs_diff(slot_b) % sats_per_orbit.max(1);
    d.min(sats_per_orbit - d)
}

/// One visibility interval of a satellite over the ground station.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccessWindow<T> {
    pub satellite: SatId,
    pub t_start: T,
    pub t_end: T,
    /// 1-based visit number `r` of this satellite within the table.
    pub visit_index: usize,
}

impl<T: Scalar> AccessWindow<T> {
    pub fn duration(&self) -> T {
        self.t_end - self.t_start
    }

    pub fn contains(&self, t: T) -> bool {
        self.t_start <= t && t <= self.t_end
    }
}

/// Root-finding settings for [`compute_access_windows`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSolver<T> {
    /// Coarse sampling step (s).
    pub scan_step: T,
    /// Bracket width at which bisection stops (s).
    pub tolerance: T,
}

impl<T: Scalar> Default for WindowSolver<T> {
    fn default() -> Self {
        Self {
            scan_step: T::lit(10.0),
            tolerance: T::lit(0.01),
        }
    }
}

/// Access windows of every satellite, indexed in (orbit, slot) order.
#[derive(Debug, Clone, PartialEq)]
pub struct AccessTable<T> {
    pub sats_per_orbit: usize,
    pub horizon: (T, T),
    per_satellite: Vec<Vec<AccessWindow<T>>>,
}

impl<T: Scalar> AccessTable<T> {
    pub fn from_windows(sats_per_orbit: usize, horizon: (T, T), per_satellite: Vec<Vec<AccessWindow<T>>>) -> Self {
        Self {
            sats_per_orbit,
            horizon,
            per_satellite,
        }
    }

    pub fn windows(&self, id: SatId) -> &[AccessWindow<T>] {
        self.per_satellite
            .get(id.orbit * self.sats_per_orbit + id.slot)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Windows of every slot on one orbit, indexed by slot.
    pub fn orbit(&self, orbit: usize) -> Vec<&[AccessWindow<T>]> {
        (0..self.sats_per_orbit)
            .map(|s| self.windows(SatId::new(orbit, s)))
            .collect()
    }

    /// All windows in (orbit, slot, time) order.
    pub fn iter(&self) -> impl Iterator<Item = &AccessWindow<T>> {
        self.per_satellite.iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.per_satellite.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Finds every maximal interval in `[t0, t1]` during which each satellite is
/// visible, by a coarse scan followed by bisection on the visibility margin.
/// Passes that rise and set between two scan samples are caught by a
/// golden-section search around sampled local maxima of the margin.
pub fn compute_access_windows<T: Scalar>(
    spec: &ConstellationSpec<T>,
    gs: &GroundStation<T>,
    consts: &PhysicalConstants<T>,
    t0: T,
    t1: T,
    solver: &WindowSolver<T>,
) -> Result<AccessTable<T>> {
    if !(t0 < t1) {
        return Err(Error::domain(format!("horizon [{t0}, {t1}] is empty or inverted")));
    }
    if !(solver.scan_step > T::zero() && solver.tolerance > T::zero()) {
        return Err(Error::domain("solver step and tolerance must be positive"));
    }
    spec.validate()?;
    gs.validate()?;
    let ids: Vec<SatId> = spec.satellites().collect();
    let per_satellite = ids
        .par_iter()
        .map(|&id| satellite_windows(spec, gs, consts, id, t0, t1, solver))
        .collect::<Result<Vec<_>>>()?;
    Ok(AccessTable::from_windows(spec.sats_per_orbit, (t0, t1), per_satellite))
}

fn satellite_windows<T: Scalar>(
    spec: &ConstellationSpec<T>,
    gs: &GroundStation<T>,
    consts: &PhysicalConstants<T>,
    id: SatId,
    t0: T,
    t1: T,
    solver: &WindowSolver<T>,
) -> Result<Vec<AccessWindow<T>>> {
    let limit = T::FRAC_PI_2() - gs.min_elevation;
    // margin >= 0 exactly when elevation_visible holds
    let margin = |t: T| -> Result<T> {
        let s = satellite_position(spec, consts, id, t)?;
        let g = ground_station_position(gs, consts, t);
        Ok(limit - zenith_angle(&s, &g)?)
    };

    let steps = ((t1 - t0) / solver.scan_step).ceil().to_usize().unwrap_or(0).max(1);
    let times: Vec<T> = (0..=steps)
        .map(|i| {
            if i == steps {
                t1
            } else {
                t0 + solver.scan_step * T::count(i)
            }
        })
        .collect();
    let values = times.iter().map(|&t| margin(t)).collect::<Result<Vec<_>>>()?;
    let visible = |v: T| v >= T::zero();

    // (time, rising)
    let mut crossings: Vec<(T, bool)> = Vec::new();
    for i in 0..steps {
        let (a, b) = (values[i], values[i + 1]);
        if visible(a) != visible(b) {
            let t = bisect(&margin, times[i], times[i + 1], visible(a), solver.tolerance)?;
            crossings.push((t, !visible(a)));
        }
    }
    for i in 1..steps {
        let (prev, here, next) = (values[i - 1], values[i], values[i + 1]);
        if visible(prev) || visible(here) || visible(next) || !(here > prev && here >= next) {
            continue;
        }
        let (peak_t, peak_v) = golden_max(&margin, times[i - 1], times[i + 1], solver.tolerance)?;
        if visible(peak_v) {
            let rise = bisect(&margin, times[i - 1], peak_t, false, solver.tolerance)?;
            let set = bisect(&margin, peak_t, times[i + 1], true, solver.tolerance)?;
            crossings.push((rise, true));
            crossings.push((set, false));
        }
    }
    crossings.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite crossing times"));

    let mut windows = Vec::new();
    let mut open = if visible(values[0]) { Some(t0) } else { None };
    for (t, rising) in crossings {
        match (rising, open) {
            (true, None) => open = Some(t),
            (false, Some(start)) => {
                push_window(&mut windows, id, start, t);
                open = None;
            }
            _ => {}
        }
    }
    if let Some(start) = open {
        push_window(&mut windows, id, start, t1);
    }
    Ok(windows)
}

fn push_window<T: Scalar>(windows: &mut Vec<AccessWindow<T>>, id: SatId, start: T, end: T) {
    if start < end {
        windows.push(AccessWindow {
            satellite: id,
            t_start: start,
            t_end: end,
            visit_index: windows.len() + 1,
        });
    }
}

/// Bisects a visibility flip inside `[lo, hi]`; `lo_visible` is the state at `lo`.
fn bisect<T, F>(f: &F, mut lo: T, mut hi: T, lo_visible: bool, tol: T) -> Result<T>
where
    T: Scalar,
    F: Fn(T) -> Result<T>,
{
    let half = T::lit(0.5);
    while hi - lo > tol {
        let mid = (lo + hi) * half;
        if (f(mid)? >= T::zero()) == lo_visible {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * half)
}

fn golden_max<T, F>(f: &F, mut a: T, mut b: T, tol: T) -> Result<(T, T)>
where
    T: Scalar,
    F: Fn(T) -> Result<T>,
{
    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d)?;
        }
    }
    let t = (a + b) * T::lit(0.5);
    Ok((t, f(t)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consts() -> PhysicalConstants<f64> {
        PhysicalConstants::default()
    }

    #[test]
    fn period_and_velocity_at_1500_km() {
        let c = consts();
        // Kepler's third law evaluated directly.
        let r: f64 = 6_371_000.0 + 1_500_000.0;
        let oracle_t = 2.0 * std::f64::consts::PI * (r.powi(3) / 3.986004418e14).sqrt();
        let t = c.orbital_period(1_500_000.0).unwrap();
        assert!((t - oracle_t).abs() < 1e-9);
        assert!((t - 6949.0).abs() < 1.0, "{t}");
        let v = c.orbital_velocity(1_500_000.0).unwrap();
        assert!((v - 7116.0).abs() < 1.0, "{v}");
        assert!((v * t / (2.0 * std::f64::consts::PI * r) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn geostationary_period_is_a_sidereal_day() {
        // geostationary radius 42 164 km
        let c = consts();
        let t = c.orbital_period(42_164_000.0 - c.earth_radius).unwrap();
        assert!((t - 86_164.0).abs() < 10.0, "{t}");
    }

    #[test]
    fn low_leo_speed_near_7_8_km_s() {
        let c = consts();
        for h in [300e3, 450e3, 600e3] {
            let v = c.orbital_velocity(h).unwrap();
            assert!((7500.0..7800.0 + 50.0).contains(&v), "{h}: {v}");
        }
        assert!(c.orbital_period(600e3).unwrap() > c.orbital_period(300e3).unwrap());
    }

    #[test]
    fn non_positive_altitude_is_rejected() {
        assert!(matches!(consts().orbital_period(0.0), Err(Error::Domain(_))));
        assert!(matches!(consts().orbital_velocity(-5.0), Err(Error::Domain(_))));
    }

    #[test]
    fn epoch_position_on_equator() {
        let spec = ConstellationSpec::walker_delta(1, 4, 1_500_000.0, 0.0);
        let p = satellite_position(&spec, &consts(), SatId::new(0, 0), 0.0).unwrap();
        assert_eq!(p, [7_871_000.0, 0.0, 0.0]);
    }

    #[test]
    fn position_is_periodic_and_norm_preserving() {
        let spec = ConstellationSpec::walker_delta(5, 8, 1_500_000.0, 80f64.to_radians());
        let c = consts();
        let period = c.orbital_period(1_500_000.0).unwrap();
        for id in spec.satellites() {
            let a = satellite_position(&spec, &c, id, 0.0).unwrap();
            let b = satellite_position(&spec, &c, id, period).unwrap();
            assert!(norm(&sub(&a, &b)) < 1e-6);
            for t in [13.7, 1000.0, 50_000.0] {
                let p = satellite_position(&spec, &c, id, t).unwrap();
                assert!((norm(&p) - 7_871_000.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn antipodal_slots_and_equal_spacing() {
        let spec = ConstellationSpec::walker_delta(2, 8, 1_500_000.0, 0.9);
        let c = consts();
        let r = 7_871_000.0f64;
        for t in [0.0, 321.0, 4000.0] {
            let a = satellite_position(&spec, &c, SatId::new(1, 0), t).unwrap();
            let b = satellite_position(&spec, &c, SatId::new(1, 4), t).unwrap();
            assert!((dot(&a, &b) + r * r).abs() / (r * r) < 1e-12);
            for s in 0..8 {
                let p = satellite_position(&spec, &c, SatId::new(1, s), t).unwrap();
                let q = satellite_position(&spec, &c, SatId::new(1, (s + 1) % 8), t).unwrap();
                let ang = (dot(&p, &q) / (r * r)).clamp(-1.0, 1.0).acos();
                assert!((ang - std::f64::consts::TAU / 8.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn out_of_range_index() {
        let spec = ConstellationSpec::walker_delta(2, 3, 1e6, 0.5);
        let err = satellite_position(&spec, &consts(), SatId::new(0, 3), 0.0).unwrap_err();
        assert!(matches!(err, Error::IndexOutOfRange { what: "slot", .. }));
        assert!(satellite_position(&spec, &consts(), SatId::new(2, 0), 0.0).is_err());
    }

    #[test]
    fn ground_station_kinematics() {
        let c = consts();
        let gs = GroundStation { latitude: 0.0, longitude: 0.0, min_elevation: 0.0 };
        assert_eq!(ground_station_position(&gs, &c, 0.0), [6_371_000.0, 0.0, 0.0]);
        let day = std::f64::consts::TAU / c.earth_rotation_rate;
        let p = ground_station_position(&gs, &c, day);
        assert!(norm(&sub(&p, &[6_371_000.0, 0.0, 0.0])) < 1e-6);

        let pole = GroundStation { latitude: std::f64::consts::FRAC_PI_2, longitude: 1.0, min_elevation: 0.1 };
        let p0 = ground_station_position(&pole, &c, 0.0);
        for t in [100.0, 20_000.0, 70_000.0] {
            let p = ground_station_position(&pole, &c, t);
            assert!(norm(&sub(&p, &p0)) < 1e-6);
            assert!((norm(&p) - 6_371_000.0).abs() < 1e-6);
        }
    }

    #[test]
    fn visibility_cases() {
        let g = [6_371_000.0, 0.0, 0.0];
        let over = [8_000_000.0, 0.0, 0.0];
        assert!(elevation_visible(&over, &g, 1.5).unwrap());
        let anti = [-8_000_000.0, 0.0, 0.0];
        assert!(!elevation_visible(&anti, &g, 0.0).unwrap());
        // Zenith angle exactly pi/2 - min_elevation is still visible.
        let horizon = [6_371_000.0, 1000.0, 0.0];
        assert!(elevation_visible(&horizon, &g, 0.0).unwrap());
        let g1 = [1.0, 0.0, 0.0];
        let diag = [2.0, 1.0, 0.0];
        assert!(elevation_visible(&diag, &g1, std::f64::consts::FRAC_PI_4).unwrap());
        assert!(!elevation_visible(&diag, &g1, std::f64::consts::FRAC_PI_4 + 1e-12).unwrap());
        assert!(matches!(elevation_visible(&g, &g, 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn ring_hops() {
        assert_eq!(ring_hop_distance(0, 4, 8), 4);
        assert_eq!(ring_hop_distance(3, 3, 8), 0);
        assert_eq!(ring_hop_distance(1, 7, 8), 2);
        assert_eq!(ring_hop_distance(0, 0, 1), 0);
        for k in 1..12 {
            let max = (0..k).flat_map(|a| (0..k).map(move |b| ring_hop_distance(a, b, k))).max();
            assert_eq!(max, Some(k / 2));
        }
    }

    #[test]
    fn inverted_horizon_is_rejected() {
        let spec = ConstellationSpec::walker_delta(1, 1, 1e6, 0.5);
        let gs = GroundStation::rolla(0.1);
        let r = compute_access_windows(&spec, &gs, &consts(), 10.0, 5.0, &WindowSolver::default());
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn degenerate_cone_gives_no_windows() {
        let spec = ConstellationSpec::walker_delta(4, 4, 1_500_000.0, 80f64.to_radians());
        let gs = GroundStation::rolla(89.9f64.to_radians());
        let table = compute_access_windows(&spec, &gs, &consts(), 0.0, 64_800.0, &WindowSolver::default()).unwrap();
        let total: f64 = table.iter().map(|w| w.duration()).sum();
        assert!(total < 60.0, "{total}");
    }

    #[test]
    fn max_pass_duration_matches_geometric_bound() {
        let c = consts();
        let h = 1_500_000.0;
        let min_el = 10f64.to_radians();
        let re = c.earth_radius;
        // Earth-central half-angle of the visibility cone, swept at the orbital rate.
        let half_angle = (re * min_el.cos() / (re + h)).acos() - min_el;
        let bound = 2.0 * half_angle / (std::f64::consts::TAU / c.orbital_period(h).unwrap());
        assert!((bound - 1042.0).abs() < 10.0, "{bound}");

        let spec = ConstellationSpec::walker_delta(5, 8, h, 80f64.to_radians());
        let gs = GroundStation::rolla(min_el);
        let table = compute_access_windows(&spec, &gs, &c, 0.0, 86_400.0, &WindowSolver::default()).unwrap();
        let longest = table
            .iter()
            .filter(|w| w.t_start > 0.0 && w.t_end < 86_400.0)
            .map(|w| w.duration())
            .fold(0.0, f64::max);
        assert!((1020.0..=1080.0).contains(&longest), "{longest}");
        assert!(longest <= bound * 1.03);
    }

    #[test]
    fn windows_are_sorted_disjoint_and_numbered() {
        let spec = ConstellationSpec::walker_delta(4, 4, 1_500_000.0, 80f64.to_radians());
        let gs = GroundStation::rolla(10f64.to_radians());
        let table = compute_access_windows(&spec, &gs, &consts(), 0.0, 64_800.0, &WindowSolver::default()).unwrap();
        for id in spec.satellites() {
            let ws = table.windows(id);
            for (i, w) in ws.iter().enumerate() {
                assert_eq!(w.visit_index, i + 1);
                assert_eq!(w.satellite, id);
                assert!(w.t_start < w.t_end);
                if i > 0 {
                    assert!(ws[i - 1].t_end < w.t_start);
                }
            }
        }
    }

    #[test]
    fn f32_geometry_is_usable() {
        let c = PhysicalConstants::<f32>::default();
        let t = c.orbital_period(1_500_000.0).unwrap();
        assert!((t - 6949.0).abs() < 2.0);
        let spec = ConstellationSpec::<f32>::walker_delta(1, 2, 1.5e6, 0.5);
        let p = satellite_position(&spec, &c, SatId::new(0, 1), 100.0).unwrap();
        assert!((norm(&p) / 7.871e6 - 1.0).abs() < 1e-5);
    }
}
