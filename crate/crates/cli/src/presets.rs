//! Sweep files that regenerate the figure data.

use clap::ValueEnum;

use crate::error::CliResult;
use crate::sweep::SweepSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// NOMA vs OMA femto outage over ρ_f for two femto densities.
    Fig2,
    /// PPP vs RPP femto outage over ρ_f.
    Fig3,
    /// Total outage with offloading over ρ_m at λ_f = 1e-3.
    Fig4,
    /// Total outage with offloading over ρ_m at λ_f = 1e-1.
    Fig5,
}

impl Preset {
    pub fn source(self) -> &'static str {
        match self {
            Preset::Fig2 => include_str!("../presets/fig2.json"),
            Preset::Fig3 => include_str!("../presets/fig3.json"),
            Preset::Fig4 => include_str!("../presets/fig4.json"),
            Preset::Fig5 => include_str!("../presets/fig5.json"),
        }
    }

    pub fn spec(self) -> CliResult<SweepSpec> {
        SweepSpec::from_json_str(self.source())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_on_a_sixteen_point_grid() {
        for p in Preset::value_variants() {
            let s = p.spec().unwrap();
            assert_eq!(s.values.len(), 16);
            assert_eq!((s.values[0], s.values[15]), (0.0, 30.0));
        }
        assert_eq!(Preset::Fig2.spec().unwrap().curves.len(), 6);
        assert_eq!(Preset::Fig3.spec().unwrap().curves.len(), 8);
        assert_eq!(Preset::Fig4.spec().unwrap().curves.len(), 16);
    }
}
