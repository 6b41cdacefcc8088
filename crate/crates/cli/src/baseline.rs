//! Versioned reference-vehicle constants, embedded at build time.

use serde::{Deserialize, Serialize};
use subscale_core::aerostruct::{Geometry, Mesh, Structure, WingModelSpec};
use subscale_core::atmosphere::CruiseCondition;
use subscale_core::range::RangeBaseline;

const EMBEDDED: &str = include_str!("../baseline/v1.toml");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    pub young_modulus: f64,
    pub poisson_ratio: f64,
    pub density: f64,
    /// Per wing half, kg.
    pub fuel_mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Baseline {
    pub version: u32,
    pub cruise: CruiseCondition,
    pub geometry: Geometry,
    pub material: Material,
    pub tubular: Structure,
    pub wingbox: Structure,
    pub range: RangeBaseline,
}

impl Baseline {
    pub fn embedded() -> Self {
        toml::from_str(EMBEDDED).expect("embedded baseline parses")
    }

    pub fn wing(&self, structure: Structure, mesh: Mesh) -> WingModelSpec {
        let m = &self.material;
        WingModelSpec {
            geometry: self.geometry,
            structure,
            young_modulus: m.young_modulus,
            shear_modulus: m.young_modulus / (2.0 * (1.0 + m.poisson_ratio)),
            material_density: m.density,
            fuel_mass: m.fuel_mass,
            mesh,
        }
    }

    /// Wing for a study label such as `wingbox_medium` or `tubular_coarse`.
    pub fn wing_by_label(&self, label: &str) -> Option<WingModelSpec> {
        let (kind, mesh) = label.split_once('_')?;
        let structure = match kind {
            "tubular" => self.tubular,
            "wingbox" => self.wingbox,
            _ => return None,
        };
        let mesh = match mesh {
            "coarse" => Mesh::Coarse,
            "medium" => Mesh::Medium,
            "fine" => Mesh::Fine,
            _ => return None,
        };
        Some(self.wing(structure, mesh))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use subscale_core::aerostruct::study_structures;

    #[test]
    fn embedded_matches_library_defaults() {
        let b = Baseline::embedded();
        assert_eq!(b.version, 1);
        assert_eq!(b.range, RangeBaseline::default());
        for (label, spec) in study_structures() {
            assert_eq!(b.wing_by_label(label), Some(spec), "{label}");
        }
        assert_eq!(b.wing_by_label("wingbox_huge"), None);
        assert_eq!(b.cruise.mach, 0.84);
    }
}
