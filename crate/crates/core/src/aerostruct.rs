//! Low-fidelity static aeroelastic wing.
//!
//! A swept, tapered, linearly twisted wing is cut into spanwise strips. Each strip
//! carries lift from a 3D lift-curve slope (Helmbold with Prandtl–Glauert
//! compressibility), friction drag from a turbulent flat plate with form factor, and
//! the wing gets an induced-drag and a Korn-type wave-drag increment.
//!
//! The structure is an Euler–Bernoulli / St. Venant beam along the swept elastic axis,
//! clamped at the root. Sections are either a thin-walled tube or a two-cell-free
//! wingbox. Bending slope and torsion feed back into the streamwise strip incidence,
//! and the loop is closed by an Aitken-relaxed fixed point.

use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::atmosphere::CruiseCondition;
use crate::{Error, Result, STANDARD_GRAVITY};

const PG_EFFICIENCY: f64 = 0.95;

/// Spanwise discretisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mesh {
    Coarse,
    Medium,
    Fine,
}

impl Mesh {
    /// Beam elements (and aerodynamic strips) per semi-span.
    pub fn elements(self) -> usize {
        match self {
            Mesh::Coarse => 10,
            Mesh::Medium => 30,
            Mesh::Fine => 120,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mesh::Coarse => "coarse",
            Mesh::Medium => "medium",
            Mesh::Fine => "fine",
        }
    }
}

/// Planform and section aerodynamics. Angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub span: f64,
    pub root_chord: f64,
    pub tip_chord: f64,
    /// Quarter-chord sweep.
    pub sweep: f64,
    pub thickness_ratio: f64,
    pub incidence: f64,
    /// Linear washout, root to tip.
    pub tip_twist: f64,
    pub zero_lift_alpha: f64,
    pub cm0: f64,
    pub oswald: f64,
    /// Korn technology factor.
    pub korn_kappa: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            span: 30.0,
            root_chord: 4.5,
            tip_chord: 1.5,
            sweep: 30.0,
            thickness_ratio: 0.11,
            incidence: -5.0,
            tip_twist: -3.0,
            zero_lift_alpha: -1.5,
            cm0: -0.05,
            oswald: 0.85,
            korn_kappa: 0.95,
        }
    }
}

impl Geometry {
    pub fn taper(&self) -> f64 {
        self.tip_chord / self.root_chord
    }

    pub fn area(&self) -> f64 {
        0.5 * self.span * (self.root_chord + self.tip_chord)
    }

    pub fn aspect_ratio(&self) -> f64 {
        self.span * self.span / self.area()
    }

    /// Mean aerodynamic chord of the trapezoidal planform. This is the reference
    /// length for Reynolds number and the stiffness similarity groups.
    pub fn mean_aerodynamic_chord(&self) -> f64 {
        let t = self.taper();
        2.0 / 3.0 * self.root_chord * (1.0 + t + t * t) / (1.0 + t)
    }

    /// Chord at spanwise station `y` from the root, `0 <= y <= span/2`.
    pub fn chord_at(&self, y: f64) -> f64 {
        self.root_chord + (self.tip_chord - self.root_chord) * y / (0.5 * self.span)
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("span", self.span),
            ("root_chord", self.root_chord),
            ("tip_chord", self.tip_chord),
            ("thickness_ratio", self.thickness_ratio),
            ("oswald", self.oswald),
            ("korn_kappa", self.korn_kappa),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(alloc::format!("{name} must be positive")));
            }
        }
        if !(self.sweep > -80.0 && self.sweep < 80.0) {
            return Err(Error::InvalidInput("sweep must lie in (-80, 80) degrees".into()));
        }
        Ok(())
    }
}

/// Primary structure. Chord fractions are measured from the leading edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Structure {
    /// Single circular tube with linear root-to-tip diameter taper, centred between
    /// `front_spar` and `rear_spar`.
    TubularSpar {
        root_diameter: f64,
        tip_diameter: f64,
        wall_thickness: f64,
        front_spar: f64,
        rear_spar: f64,
    },
    /// Rectangular thin-walled box between the spars, height `0.9 t/c` of the chord.
    Wingbox {
        front_spar: f64,
        rear_spar: f64,
        skin_thickness: f64,
        spar_thickness: f64,
    },
}

impl Structure {
    pub fn default_wingbox() -> Self {
        Structure::Wingbox {
            front_spar: 0.10,
            rear_spar: 0.60,
            skin_thickness: 0.006,
            spar_thickness: 0.006,
        }
    }

    pub fn default_tubular() -> Self {
        Structure::TubularSpar {
            root_diameter: 0.42,
            tip_diameter: 0.14,
            wall_thickness: 0.025,
            front_spar: 0.10,
            rear_spar: 0.60,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Structure::TubularSpar { .. } => "tubular_spar",
            Structure::Wingbox { .. } => "wingbox",
        }
    }

    pub fn spars(&self) -> (f64, f64) {
        match *self {
            Structure::TubularSpar {
                front_spar, rear_spar, ..
            }
            | Structure::Wingbox {
                front_spar, rear_spar, ..
            } => (front_spar, rear_spar),
        }
    }

    pub fn set_rear_spar(&mut self, value: f64) {
        match self {
            Structure::TubularSpar { rear_spar, .. } | Structure::Wingbox { rear_spar, .. } => *rear_spar = value,
        }
    }

    /// Elastic-axis chord fraction.
    pub fn elastic_axis(&self) -> f64 {
        let (f, r) = self.spars();
        0.5 * (f + r)
    }

    fn validate(&self) -> Result<()> {
        let (f, r) = self.spars();
        if !(0.0 <= f && f < r && r <= 1.0) {
            return Err(Error::InvalidInput(alloc::format!(
                "spar fractions must satisfy 0 <= front < rear <= 1, got {f} and {r}"
            )));
        }
        let thick = match *self {
            Structure::TubularSpar {
                root_diameter,
                tip_diameter,
                wall_thickness,
                ..
            } => {
                if !(wall_thickness > 0.0 && 2.0 * wall_thickness <= root_diameter.min(tip_diameter)) {
                    return Err(Error::InvalidInput(
                        "tube wall must be positive and at most half the diameter".into(),
                    ));
                }
                [root_diameter, tip_diameter, wall_thickness]
            }
            Structure::Wingbox {
                skin_thickness,
                spar_thickness,
                ..
            } => [skin_thickness, spar_thickness, 1.0],
        };
        if thick.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::InvalidInput("structural thicknesses must be positive".into()));
        }
        Ok(())
    }

    fn scale_lengths(&mut self, n: f64) {
        match self {
            Structure::TubularSpar {
                root_diameter,
                tip_diameter,
                wall_thickness,
                ..
            } => {
                *root_diameter *= n;
                *tip_diameter *= n;
                *wall_thickness *= n;
            }
            Structure::Wingbox {
                skin_thickness,
                spar_thickness,
                ..
            } => {
                *skin_thickness *= n;
                *spar_thickness *= n;
            }
        }
    }
}

/// Section stiffness and area at one spanwise station.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Section {
    /// Second moment of area, m⁴.
    pub i: f64,
    /// Torsion constant, m⁴.
    pub j: f64,
    /// Material area, m².
    pub area: f64,
}

/// Thin-walled tube of outer diameter `d` and wall `t`.
pub fn tube_section(d: f64, t: f64) -> Section {
    let di = d - 2.0 * t;
    let i = PI / 64.0 * (d.powi(4) - di.powi(4));
    Section {
        i,
        j: 2.0 * i,
        area: PI / 4.0 * (d * d - di * di),
    }
}

/// Rectangular box of width `w`, height `h`, skins `ts`, webs `tw` (Bredt–Batho
/// torsion constant).
pub fn box_section(w: f64, h: f64, ts: f64, tw: f64) -> Section {
    Section {
        i: 2.0 * w * ts * (0.5 * h) * (0.5 * h) + 2.0 * tw * h * h * h / 12.0,
        j: 4.0 * (w * h) * (w * h) / (2.0 * w / ts + 2.0 * h / tw),
        area: 2.0 * w * ts + 2.0 * h * tw,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WingModelSpec {
    pub geometry: Geometry,
    pub structure: Structure,
    pub young_modulus: f64,
    pub shear_modulus: f64,
    pub material_density: f64,
    /// Fuel carried in one wing half, kg, distributed proportionally to chord².
    pub fuel_mass: f64,
    pub mesh: Mesh,
}

pub const ALUMINIUM_E: f64 = 73.1e9;
pub const ALUMINIUM_NU: f64 = 0.33;
pub const ALUMINIUM_DENSITY: f64 = 2780.0;

impl WingModelSpec {
    pub fn new(structure: Structure, mesh: Mesh) -> Self {
        Self {
            geometry: Geometry::default(),
            structure,
            young_modulus: ALUMINIUM_E,
            shear_modulus: ALUMINIUM_E / (2.0 * (1.0 + ALUMINIUM_NU)),
            material_density: ALUMINIUM_DENSITY,
            fuel_mass: 4000.0,
            mesh,
        }
    }

    pub fn wingbox(mesh: Mesh) -> Self {
        Self::new(Structure::default_wingbox(), mesh)
    }

    pub fn tubular(mesh: Mesh) -> Self {
        Self::new(Structure::default_tubular(), mesh)
    }

    /// Sets `E` and moves `G` with it at constant Poisson ratio.
    pub fn with_young_modulus(mut self, e: f64) -> Self {
        self.shear_modulus *= e / self.young_modulus;
        self.young_modulus = e;
        self
    }

    /// Geometrically similar model at length scale `n`, with Young's modulus `e` and
    /// total mass (structure and fuel) scaled by `n_mass`.
    pub fn scaled(&self, n: f64, e: f64, n_mass: f64) -> Self {
        let mut s = self.with_young_modulus(e);
        let g = &mut s.geometry;
        g.span *= n;
        g.root_chord *= n;
        g.tip_chord *= n;
        s.structure.scale_lengths(n);
        s.fuel_mass *= n_mass;
        s.material_density *= n_mass / (n * n * n);
        s
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.structure.validate()?;
        for (name, v) in [
            ("young_modulus", self.young_modulus),
            ("shear_modulus", self.shear_modulus),
            ("material_density", self.material_density),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(alloc::format!("{name} must be positive")));
            }
        }
        if !(self.fuel_mass >= 0.0 && self.fuel_mass.is_finite()) {
            return Err(Error::InvalidInput("fuel_mass must be non-negative".into()));
        }
        Ok(())
    }

    /// Section at spanwise station `y`.
    pub fn section_at(&self, y: f64) -> Section {
        let g = &self.geometry;
        let c = g.chord_at(y);
        match self.structure {
            Structure::TubularSpar {
                root_diameter,
                tip_diameter,
                wall_thickness,
                ..
            } => {
                let d = root_diameter + (tip_diameter - root_diameter) * y / (0.5 * g.span);
                tube_section(d, wall_thickness)
            }
            Structure::Wingbox {
                front_spar,
                rear_spar,
                skin_thickness,
                spar_thickness,
            } => box_section(
                (rear_spar - front_spar) * c,
                0.9 * g.thickness_ratio * c,
                skin_thickness,
                spar_thickness,
            ),
        }
    }

    pub fn root_bending_stiffness(&self) -> f64 {
        self.young_modulus * self.section_at(0.0).i
    }

    pub fn root_torsional_stiffness(&self) -> f64 {
        self.shear_modulus * self.section_at(0.0).j
    }
}

/// The five model structures of the L/D variability study, labelled.
pub fn study_structures() -> Vec<(&'static str, WingModelSpec)> {
    alloc::vec![
        ("tubular_coarse", WingModelSpec::tubular(Mesh::Coarse)),
        ("tubular_medium", WingModelSpec::tubular(Mesh::Medium)),
        ("wingbox_coarse", WingModelSpec::wingbox(Mesh::Coarse)),
        ("wingbox_medium", WingModelSpec::wingbox(Mesh::Medium)),
        ("wingbox_fine", WingModelSpec::wingbox(Mesh::Fine)),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AeroStructOptions {
    /// Skip the structural feedback entirely.
    pub rigid: bool,
    pub skin_friction: bool,
    pub wave_drag: bool,
    /// Subtract structural and fuel weight from the lift load.
    pub inertial_relief: bool,
    /// Relative fixed-point tolerance on the elastic twist distribution.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for AeroStructOptions {
    fn default() -> Self {
        Self {
            rigid: false,
            skin_friction: true,
            wave_drag: true,
            inertial_relief: true,
            tolerance: 1e-6,
            max_iterations: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AeroStructResult {
    pub cl: f64,
    pub cd: f64,
    pub cd_friction: f64,
    pub cd_induced: f64,
    pub cd_wave: f64,
    pub l_over_d: f64,
    pub reynolds: f64,
    pub mach: f64,
    /// Both wing halves, structure only, kg.
    pub wing_mass: f64,
    pub root_ei: f64,
    pub root_gj: f64,
    /// Bending deflection of the elastic axis at the tip, m.
    pub tip_deflection: f64,
    /// Streamwise elastic incidence change at the tip, degrees.
    pub tip_twist: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Wall-clock seconds; zero unless filled in by a timed runner.
    pub runtime: f64,
}

/// Bending slope and deflection of a clamped beam with `n + 1` equally spaced nodes
/// (spacing `h`) under nodal transverse forces. Curvature is linear between nodes and
/// integrated exactly.
pub fn cantilever_bending(ei: &[f64], h: f64, forces: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = nodal_moments(h, forces);
    let kappa: Vec<f64> = m.iter().zip(ei).map(|(m, ei)| m / ei).collect();
    let n = kappa.len();
    let mut slope = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    for i in 0..n - 1 {
        slope[i + 1] = slope[i] + 0.5 * h * (kappa[i] + kappa[i + 1]);
        w[i + 1] = w[i] + h * slope[i] + h * h * (kappa[i] / 3.0 + kappa[i + 1] / 6.0);
    }
    (slope, w)
}

/// Root-side bending moment at every node from nodal forces.
fn nodal_moments(h: f64, forces: &[f64]) -> Vec<f64> {
    let n = forces.len();
    let mut m = alloc::vec![0.0; n];
    let mut shear = 0.0;
    for i in (0..n - 1).rev() {
        shear += forces[i + 1];
        m[i] = m[i + 1] + shear * h;
    }
    m
}

/// Twist of a clamped shaft under nodal torques; element compliance is the mean of
/// the nodal `1/GJ`.
pub fn cantilever_torsion(gj: &[f64], h: f64, torques: &[f64]) -> Vec<f64> {
    let n = torques.len();
    let mut theta = alloc::vec![0.0; n];
    let mut internal = 0.0;
    let mut inner = alloc::vec![0.0; n];
    for i in (0..n - 1).rev() {
        internal += torques[i + 1];
        inner[i] = internal;
    }
    for i in 0..n - 1 {
        theta[i + 1] = theta[i] + h * inner[i] * 0.5 * (1.0 / gj[i] + 1.0 / gj[i + 1]);
    }
    theta
}

/// 3D lift-curve slope per radian (Helmbold/DATCOM with Prandtl–Glauert).
pub fn lift_curve_slope(aspect_ratio: f64, sweep_deg: f64, mach: f64) -> f64 {
    let beta2 = 1.0 - mach * mach;
    let tan_l = libm::tan(sweep_deg.to_radians());
    let ar = aspect_ratio;
    2.0 * PI * ar
        / (2.0 + libm::sqrt(4.0 + ar * ar * beta2 / (PG_EFFICIENCY * PG_EFFICIENCY) * (1.0 + tan_l * tan_l / beta2)))
}

/// Turbulent flat-plate skin-friction coefficient with compressibility correction.
pub fn skin_friction_coefficient(re: f64, mach: f64) -> f64 {
    0.455 / libm::pow(libm::log10(re), 2.58) / libm::pow(1.0 + 0.144 * mach * mach, 0.65)
}

/// Korn-equation critical Mach number.
pub fn critical_mach(kappa: f64, tc: f64, cl: f64, sweep_deg: f64) -> f64 {
    let c = libm::cos(sweep_deg.to_radians());
    let mdd = kappa / c - tc / (c * c) - cl.abs() / (10.0 * c * c * c);
    mdd - libm::cbrt(0.1 / 80.0)
}

fn finite(v: f64, what: &'static str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::EvaluationFailed(what))
    }
}

/// Evaluates the coupled wing at `cond`.
pub fn evaluate_aerostruct(spec: &WingModelSpec, cond: &CruiseCondition) -> Result<AeroStructResult> {
    evaluate_aerostruct_with(spec, cond, &AeroStructOptions::default())
}

pub fn evaluate_aerostruct_with(
    spec: &WingModelSpec,
    cond: &CruiseCondition,
    opts: &AeroStructOptions,
) -> Result<AeroStructResult> {
    spec.validate()?;
    cond.validate()?;
    let g = &spec.geometry;
    let atm = cond.atmosphere()?;
    let v = atm.velocity(cond.mach);
    let q = 0.5 * atm.density * v * v;

    let n = spec.mesh.elements();
    let semi = 0.5 * g.span;
    let dy = semi / n as f64;
    let lam = g.sweep.to_radians();
    let (cos_l, sin_l) = (libm::cos(lam), libm::sin(lam));
    let ds = dy / cos_l;
    let area = g.area();
    let ar = g.aspect_ratio();
    let cla = lift_curve_slope(ar, g.sweep, cond.mach);

    let y: Vec<f64> = (0..=n).map(|i| i as f64 * dy).collect();
    let chord: Vec<f64> = y.iter().map(|&y| g.chord_at(y)).collect();
    // Tributary span of each node.
    let trib: Vec<f64> = (0..=n).map(|i| if i == 0 || i == n { 0.5 * dy } else { dy }).collect();
    let jig: Vec<f64> = y
        .iter()
        .map(|&y| (cond.alpha + g.incidence + g.tip_twist * y / semi - g.zero_lift_alpha).to_radians())
        .collect();

    let sections: Vec<Section> = y.iter().map(|&y| spec.section_at(y)).collect();
    let ei: Vec<f64> = sections.iter().map(|s| spec.young_modulus * s.i).collect();
    let gj: Vec<f64> = sections.iter().map(|s| spec.shear_modulus * s.j).collect();
    // Mass per unit span: structure runs along the swept axis.
    let m_struct: Vec<f64> = sections
        .iter()
        .map(|s| spec.material_density * s.area / cos_l)
        .collect();
    let c2_integral: f64 = chord.iter().zip(&trib).map(|(c, t)| c * c * t).sum();
    let m_fuel: Vec<f64> = chord.iter().map(|c| spec.fuel_mass * c * c / c2_integral).collect();
    let x_ea = spec.structure.elastic_axis();

    let mut d_alpha = alloc::vec![0.0; n + 1];
    let mut converged = opts.rigid;
    let mut iterations = 0;
    let mut slope = alloc::vec![0.0; n + 1];
    let mut deflection = alloc::vec![0.0; n + 1];
    if !opts.rigid {
        let mut r_prev: Vec<f64> = Vec::new();
        let mut omega = 0.5;
        let mut forces = alloc::vec![0.0; n + 1];
        let mut torques = alloc::vec![0.0; n + 1];
        for it in 0..opts.max_iterations {
            iterations = it + 1;
            for i in 0..=n {
                let lift = q * chord[i] * cla * (jig[i] + d_alpha[i]);
                let weight = if opts.inertial_relief {
                    STANDARD_GRAVITY * (m_struct[i] + m_fuel[i])
                } else {
                    0.0
                };
                forces[i] = (lift - weight) * trib[i];
                torques[i] = (lift * (x_ea - 0.25) * chord[i] + q * chord[i] * chord[i] * g.cm0) * cos_l * trib[i];
            }
            let (s, w) = cantilever_bending(&ei, ds, &forces);
            let theta = cantilever_torsion(&gj, ds, &torques);
            let mut max_new: f64 = 0.0;
            let mut max_r: f64 = 0.0;
            let r: Vec<f64> = (0..=n)
                .map(|i| {
                    let new = theta[i] * cos_l - s[i] * sin_l;
                    max_new = max_new.max(new.abs());
                    let r = new - d_alpha[i];
                    max_r = max_r.max(r.abs());
                    r
                })
                .collect();
            slope = s;
            deflection = w;
            if !max_r.is_finite() {
                return Err(Error::EvaluationFailed("non-finite aeroelastic residual"));
            }
            if max_r <= opts.tolerance * max_new.max(1e-12) {
                converged = true;
                break;
            }
            if !r_prev.is_empty() {
                let (mut num, mut den) = (0.0, 0.0);
                for i in 0..=n {
                    let dr = r[i] - r_prev[i];
                    num += r_prev[i] * dr;
                    den += dr * dr;
                }
                if den > 0.0 {
                    omega = -omega * num / den;
                }
            }
            for i in 0..=n {
                d_alpha[i] += omega * r[i];
            }
            r_prev = r;
        }
    }
    let _ = &slope;

    // Aerodynamic forces on the final twist distribution.
    let lift_int: f64 = (0..=n).map(|i| chord[i] * cla * (jig[i] + d_alpha[i]) * trib[i]).sum();
    let cl = finite(2.0 * lift_int / area, "non-finite lift")?;
    let cd_friction = if opts.skin_friction {
        let ff = (1.0 + 0.6 / 0.35 * g.thickness_ratio + 100.0 * g.thickness_ratio.powi(4))
            * (1.34 * libm::pow(cond.mach, 0.18) * libm::pow(cos_l, 0.28));
        let wet = 2.0 * (1.0 + 0.2 * g.thickness_ratio);
        let s: f64 = (0..=n)
            .map(|i| {
                let re_c = atm.density * v * chord[i] / atm.dynamic_viscosity;
                skin_friction_coefficient(re_c, cond.mach) * chord[i] * trib[i]
            })
            .sum();
        2.0 * s * ff * wet / area
    } else {
        0.0
    };
    let cd_induced = cl * cl / (PI * g.oswald * ar);
    let cd_wave = if opts.wave_drag {
        let mcr = critical_mach(g.korn_kappa, g.thickness_ratio, cl, g.sweep);
        if cond.mach > mcr {
            20.0 * (cond.mach - mcr).powi(4)
        } else {
            0.0
        }
    } else {
        0.0
    };
    let cd = finite(cd_friction + cd_induced + cd_wave, "non-finite drag")?;
    let wing_mass: f64 = 2.0 * (0..=n).map(|i| m_struct[i] * trib[i]).sum::<f64>();
    let mac = g.mean_aerodynamic_chord();
    Ok(AeroStructResult {
        cl,
        cd,
        cd_friction,
        cd_induced,
        cd_wave,
        l_over_d: cl / cd,
        reynolds: atm.density * v * mac / atm.dynamic_viscosity,
        mach: cond.mach,
        wing_mass,
        root_ei: ei[0],
        root_gj: gj[0],
        tip_deflection: finite(deflection[n], "non-finite deflection")?,
        tip_twist: finite(d_alpha[n], "non-finite twist")?.to_degrees(),
        converged,
        iterations,
        runtime: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cruise() -> CruiseCondition {
        CruiseCondition::new(0.84, 9.0, 10_000.0).unwrap()
    }

    #[test]
    fn mesh_counts_increase() {
        assert!(Mesh::Coarse.elements() < Mesh::Medium.elements());
        assert!(Mesh::Medium.elements() < Mesh::Fine.elements());
    }

    #[test]
    fn all_study_structures_converge_at_cruise() {
        for (name, spec) in study_structures() {
            let r = evaluate_aerostruct(&spec, &cruise()).unwrap();
            assert!(r.converged, "{name}: {r:?}");
            assert!(r.cd > 0.0 && r.l_over_d > 5.0 && r.l_over_d < 40.0, "{name}: {r:?}");
            assert!(r.tip_deflection > 0.0);
        }
    }

    #[test]
    fn rigid_limit() {
        let rigid_opts = AeroStructOptions {
            rigid: true,
            ..Default::default()
        };
        // Elastic corrections scale with 1/E: about 3e-4 deg of twist at 1e15 Pa, and
        // L/D agrees to 1e-6 once E reaches 1e18 Pa.
        for (e, twist_tol, ld_tol) in [(1e15, 1e-3, 1e-4), (1e18, 1e-6, 1e-6)] {
            let stiff = WingModelSpec::wingbox(Mesh::Medium).with_young_modulus(e);
            let flex = evaluate_aerostruct(&stiff, &cruise()).unwrap();
            let rigid = evaluate_aerostruct_with(&stiff, &cruise(), &rigid_opts).unwrap();
            assert!(flex.tip_twist.abs() < twist_tol, "{e}: {}", flex.tip_twist);
            assert!((flex.l_over_d - rigid.l_over_d).abs() < ld_tol, "{e}");
            assert_eq!(rigid.tip_twist, 0.0);
        }
    }

    #[test]
    fn symmetric_section_at_zero_alpha() {
        let mut spec = WingModelSpec::wingbox(Mesh::Medium);
        spec.geometry.incidence = 0.0;
        spec.geometry.tip_twist = 0.0;
        spec.geometry.zero_lift_alpha = 0.0;
        spec.geometry.cm0 = 0.0;
        let opts = AeroStructOptions {
            inertial_relief: false,
            ..Default::default()
        };
        let r = evaluate_aerostruct_with(&spec, &CruiseCondition::new(0.7, 0.0, 10_000.0).unwrap(), &opts).unwrap();
        assert!(r.cl.abs() < 1e-12 && r.l_over_d.abs() < 1e-10);
    }

    #[test]
    fn halving_e() {
        let a = WingModelSpec::wingbox(Mesh::Medium);
        let b = a.with_young_modulus(0.5 * a.young_modulus);
        assert_eq!(b.root_bending_stiffness(), 0.5 * a.root_bending_stiffness());
        let ra = evaluate_aerostruct(&a, &cruise()).unwrap();
        let rb = evaluate_aerostruct(&b, &cruise()).unwrap();
        assert_eq!(rb.root_ei, 0.5 * ra.root_ei);
        assert!(rb.tip_deflection > ra.tip_deflection);
    }

    #[test]
    fn tapered_beam_matches_quadrature() {
        // Clamped beam, EI(s) = 2 - s on [0, 1], uniform load 1: w(1) = ∫∫ M/EI by dense
        // midpoint quadrature.
        let n = 120;
        let h = 1.0 / n as f64;
        let ei: Vec<f64> = (0..=n).map(|i| 2.0 - i as f64 * h).collect();
        let f: Vec<f64> = (0..=n).map(|i| if i == 0 || i == n { 0.5 * h } else { h }).collect();
        let (_, w) = cantilever_bending(&ei, h, &f);
        let k = 20_000;
        let dh = 1.0 / k as f64;
        let (mut slope, mut defl) = (0.0, 0.0);
        for i in 0..k {
            let s = (i as f64 + 0.5) * dh;
            let kappa = 0.5 * (1.0 - s) * (1.0 - s) / (2.0 - s);
            defl += slope * dh + 0.5 * kappa * dh * dh;
            slope += kappa * dh;
        }
        assert!((w[n] - defl).abs() < 1e-3 * defl, "{} vs {defl}", w[n]);
    }

    #[test]
    fn tip_load_matches_closed_form() {
        let n = Mesh::Fine.elements();
        let (l, p, ei) = (12.0, 1500.0, 3.0e7);
        let h = l / n as f64;
        let mut f = alloc::vec![0.0; n + 1];
        f[n] = p;
        let (_, w) = cantilever_bending(&alloc::vec![ei; n + 1], h, &f);
        let exact = p * l * l * l / (3.0 * ei);
        assert!((w[n] - exact).abs() < 0.01 * exact);
    }

    #[test]
    fn induced_drag_identity() {
        let spec = WingModelSpec::wingbox(Mesh::Medium);
        let opts = AeroStructOptions {
            skin_friction: false,
            wave_drag: false,
            ..Default::default()
        };
        let r = evaluate_aerostruct_with(&spec, &cruise(), &opts).unwrap();
        let g = spec.geometry;
        assert!((r.cd * PI * g.oswald * g.aspect_ratio() - r.cl * r.cl).abs() < 1e-10);
    }

    #[test]
    fn reynolds_definition() {
        let spec = WingModelSpec::wingbox(Mesh::Coarse);
        let c = cruise();
        let r = evaluate_aerostruct(&spec, &c).unwrap();
        let a = c.atmosphere().unwrap();
        let re = a.density * a.velocity(c.mach) * spec.geometry.mean_aerodynamic_chord() / a.dynamic_viscosity;
        assert!((r.reynolds - re).abs() <= 1e-12 * re);
    }

    #[test]
    fn deterministic() {
        let spec = WingModelSpec::tubular(Mesh::Medium);
        assert_eq!(
            evaluate_aerostruct(&spec, &cruise()),
            evaluate_aerostruct(&spec, &cruise())
        );
    }

    #[test]
    fn invalid_inputs() {
        let mut spec = WingModelSpec::wingbox(Mesh::Coarse);
        spec.structure.set_rear_spar(0.05);
        assert!(matches!(
            evaluate_aerostruct(&spec, &cruise()),
            Err(Error::InvalidInput(_))
        ));
        let mut spec = WingModelSpec::wingbox(Mesh::Coarse);
        spec.young_modulus = f64::NAN;
        assert!(evaluate_aerostruct(&spec, &cruise()).is_err());
    }

    #[test]
    fn very_flexible_wing_reports_non_convergence() {
        let spec = WingModelSpec::wingbox(Mesh::Coarse).with_young_modulus(1e8);
        match evaluate_aerostruct(&spec, &cruise()) {
            Ok(r) => assert!(!r.converged || r.tip_deflection.abs() > 1.0),
            Err(e) => assert!(matches!(e, Error::EvaluationFailed(_))),
        }
    }

    #[test]
    fn scaled_model() {
        let full = WingModelSpec::wingbox(Mesh::Medium);
        let sub = full.scaled(0.2, 2.0 * ALUMINIUM_E, 0.0027);
        assert!((sub.geometry.span - 6.0).abs() < 1e-12);
        assert!((sub.fuel_mass - 4000.0 * 0.0027).abs() < 1e-9);
        assert!((sub.shear_modulus / sub.young_modulus - full.shear_modulus / full.young_modulus).abs() < 1e-15);
        let rf = evaluate_aerostruct(&full, &cruise()).unwrap();
        let rs = evaluate_aerostruct(&sub, &cruise()).unwrap();
        assert!((rs.wing_mass / rf.wing_mass - 0.0027).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn cl_nondecreasing_in_mach(m1 in 0.3f64..0.75, dm in 0.0f64..0.05, alpha in 7.0f64..12.0) {
            let spec = WingModelSpec::wingbox(Mesh::Coarse);
            let opts = AeroStructOptions { rigid: true, ..Default::default() };
            let a = evaluate_aerostruct_with(&spec, &CruiseCondition::new(m1, alpha, 10_000.0).unwrap(), &opts).unwrap();
            let b = evaluate_aerostruct_with(&spec, &CruiseCondition::new(m1 + dm, alpha, 10_000.0).unwrap(), &opts).unwrap();
            prop_assert!(b.cl >= a.cl);
        }
    }
}
