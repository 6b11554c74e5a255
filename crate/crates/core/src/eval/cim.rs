//! Analytical cost model for crossbar compute-in-memory accelerators.
//!
//! The model maps a layer-wise design (weight/input bit precisions and
//! subarray size per layer, plus a global ADC precision and column-sharing
//! factor) to five objectives: inference accuracy, chip area, inference
//! latency, inference energy, and memory utilization. The formulas capture
//! the first-order trade-offs of such hardware; the constants are synthetic
//! and configurable, chosen to land in plausible units (mm^2, ms, uJ) for a
//! CIFAR-scale network, so absolute values are illustrative rather than
//! silicon-accurate.
//!
//! Per layer `l`, with `rows = fan_in`, `columns = fan_out * wbp_l` (one
//! physical column per weight bit), `sub_r = ceil(rows / css_l)`,
//! `sub_c = ceil(columns / css_l)`, and `subarrays = sub_r * sub_c`:
//!
//! - area: `subarrays * css^2 * cell_area * (1 + peripheral_area_fraction)`
//!   plus `subarrays * (css / ccm) * adc_area(abp)`; each subarray carries
//!   one ADC per `ccm` columns.
//! - latency: `positions * ibp * ccm * adc_time(abp) * sub_r` (column
//!   sharing serializes `ccm` conversions; row blocks are processed in
//!   sequence) plus a pipeline term `positions * ibp * cycle_time`.
//! - energy: `positions * ibp * (rows * columns * cell_read_energy +
//!   subarrays * (css / ccm) * adc_energy(abp))`.
//! - utilization: percentage of allocated crossbar cells holding weights.
//! - accuracy: a quantization-error budget. Each layer contributes
//!   `sensitivity * (wn * 2^(-2 wbp) + in * 2^(-2 ibp) + an * 2^(-2 abp) *
//!   log2(css))`; accuracy is `100 * ceiling * (1 - min(1, total))`. The
//!   column mux factor `ccm` only re-times conversions, so it never touches
//!   accuracy.
//!
//! ADC cost scales exponentially with its bit precision:
//! `adc_{area,energy,time}(b) = unit * 2^b`.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::Evaluator;
use crate::objective::{ObjectiveVector, Sense};
use crate::space::{DesignPoint, DesignSpace, ParamScope};

/// Cost-model constants. Every field has a unit so configurations stay
/// interpretable; see the module docs for where each one enters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CimParams {
    /// mm^2 per crossbar cell.
    pub cell_area: f64,
    /// Extra area per cell for drivers, decoders, and sense lines.
    pub peripheral_area_fraction: f64,
    /// mm^2 per ADC, scaled by `2^abp`.
    pub adc_area_unit: f64,
    /// uJ per conversion, scaled by `2^abp`.
    pub adc_energy_unit: f64,
    /// ms per conversion, scaled by `2^abp`.
    pub adc_time_unit: f64,
    /// uJ per cell read per input bit-plane.
    pub cell_read_energy: f64,
    /// ms of pipeline overhead per input bit-plane.
    pub cycle_time: f64,
    /// Best reachable accuracy, as a fraction.
    pub accuracy_ceiling: f64,
    /// Error-budget weight of weight quantization.
    pub weight_noise: f64,
    /// Error-budget weight of input quantization.
    pub input_noise: f64,
    /// Error-budget weight of ADC quantization (grows with column count).
    pub adc_noise: f64,
}

impl Default for CimParams {
    fn default() -> Self {
        CimParams {
            cell_area: 2.5e-7,
            peripheral_area_fraction: 0.25,
            adc_area_unit: 5e-6,
            adc_energy_unit: 2e-8,
            adc_time_unit: 3e-8,
            cell_read_energy: 5e-10,
            cycle_time: 1e-5,
            accuracy_ceiling: 0.97,
            weight_noise: 0.055,
            input_noise: 0.62,
            adc_noise: 0.65,
        }
    }
}

impl CimParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("cell_area", self.cell_area),
            ("adc_area_unit", self.adc_area_unit),
            ("adc_energy_unit", self.adc_energy_unit),
            ("adc_time_unit", self.adc_time_unit),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(format!("{name} must be positive")));
            }
        }
        let non_negative = [
            ("peripheral_area_fraction", self.peripheral_area_fraction),
            ("cell_read_energy", self.cell_read_energy),
            ("cycle_time", self.cycle_time),
            ("weight_noise", self.weight_noise),
            ("input_noise", self.input_noise),
            ("adc_noise", self.adc_noise),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::validation(format!("{name} must be non-negative")));
            }
        }
        if !(self.accuracy_ceiling.is_finite()
            && self.accuracy_ceiling > 0.0
            && self.accuracy_ceiling <= 1.0)
        {
            return Err(Error::validation("accuracy_ceiling must be in (0, 1]"));
        }
        Ok(())
    }
}

/// Slot indices of one parameter family, resolved once at construction.
struct FamilySlots {
    wbp: Vec<usize>,
    ibp: Vec<usize>,
    css: Vec<usize>,
    abp: usize,
    ccm: usize,
}

pub struct CimEvaluator {
    space: DesignSpace,
    params: CimParams,
    slots: FamilySlots,
    names: Vec<String>,
    senses: Vec<Sense>,
    queries: AtomicU64,
}

impl CimEvaluator {
    /// Binds the cost model to a space. The space must provide per-layer
    /// `wbp`, `ibp`, and `css` parameters and global `abp` and `ccm`
    /// parameters, all with positive levels, and no `ccm` level may exceed
    /// any `css` level (each ADC serves at least one column).
    pub fn new(space: DesignSpace, params: CimParams) -> Result<Self> {
        params.validate()?;
        if space.layers().is_empty() {
            return Err(Error::validation("cost model needs at least one layer"));
        }

        let find = |name: &str, scope: ParamScope| -> Result<usize> {
            let (idx, spec) = space
                .params()
                .iter()
                .enumerate()
                .find(|(_, p)| p.name == name)
                .ok_or_else(|| Error::validation(format!("space is missing parameter '{name}'")))?;
            if spec.scope != scope {
                return Err(Error::validation(format!(
                    "parameter '{name}' must be {}",
                    match scope {
                        ParamScope::PerLayer => "per-layer",
                        ParamScope::Global => "global",
                    }
                )));
            }
            if spec.levels.iter().any(|&l| l < 1) {
                return Err(Error::validation(format!(
                    "parameter '{name}' levels must be positive"
                )));
            }
            Ok(idx)
        };
        let wbp_param = find("wbp", ParamScope::PerLayer)?;
        let ibp_param = find("ibp", ParamScope::PerLayer)?;
        let css_param = find("css", ParamScope::PerLayer)?;
        let abp_param = find("abp", ParamScope::Global)?;
        let ccm_param = find("ccm", ParamScope::Global)?;

        let css_min = *space.params()[css_param].levels.iter().min().unwrap();
        let ccm_max = *space.params()[ccm_param].levels.iter().max().unwrap();
        if ccm_max > css_min {
            return Err(Error::validation(format!(
                "ccm level {ccm_max} exceeds the smallest css level {css_min}"
            )));
        }

        let slots_of = |param: usize| -> Vec<usize> {
            space
                .slots()
                .iter()
                .enumerate()
                .filter(|(_, s)| s.param == param)
                .map(|(i, _)| i)
                .collect()
        };
        let slots = FamilySlots {
            wbp: slots_of(wbp_param),
            ibp: slots_of(ibp_param),
            css: slots_of(css_param),
            abp: slots_of(abp_param)[0],
            ccm: slots_of(ccm_param)[0],
        };

        Ok(CimEvaluator {
            space,
            params,
            slots,
            names: [
                "accuracy_pct",
                "area_mm2",
                "latency_ms",
                "energy_uj",
                "mem_util_pct",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
            senses: vec![
                Sense::Maximize,
                Sense::Minimize,
                Sense::Minimize,
                Sense::Minimize,
                Sense::Maximize,
            ],
            queries: AtomicU64::new(0),
        })
    }

    pub fn space(&self) -> &DesignSpace {
        &self.space
    }

    pub fn params(&self) -> &CimParams {
        &self.params
    }

    fn compute(&self, point: &DesignPoint) -> Result<ObjectiveVector> {
        let values = self.space.level_values(point)?;
        let p = &self.params;
        let abp = values[self.slots.abp] as f64;
        let ccm = values[self.slots.ccm] as f64;
        let adc_area = p.adc_area_unit * abp.exp2();
        let adc_energy = p.adc_energy_unit * abp.exp2();
        let adc_time = p.adc_time_unit * abp.exp2();

        let mut area = 0.0;
        let mut latency = 0.0;
        let mut energy = 0.0;
        let mut used_cells = 0.0;
        let mut allocated_cells = 0.0;
        let mut error_budget = 0.0;

        for (li, layer) in self.space.layers().iter().enumerate() {
            let wbp = values[self.slots.wbp[li]] as f64;
            let ibp = values[self.slots.ibp[li]] as f64;
            let css = values[self.slots.css[li]] as f64;
            let rows = layer.fan_in as f64;
            let columns = layer.fan_out as f64 * wbp;
            let positions = layer.output_positions as f64;

            let sub_r = (rows / css).ceil();
            let sub_c = (columns / css).ceil();
            let subarrays = sub_r * sub_c;
            let adcs = subarrays * (css / ccm);

            area += subarrays * css * css * p.cell_area * (1.0 + p.peripheral_area_fraction)
                + adcs * adc_area;
            latency += positions * ibp * (ccm * adc_time * sub_r + p.cycle_time);
            energy += positions * ibp * (rows * columns * p.cell_read_energy + adcs * adc_energy);
            used_cells += rows * columns;
            allocated_cells += subarrays * css * css;

            error_budget += layer.sensitivity
                * (p.weight_noise * (-2.0 * wbp).exp2()
                    + p.input_noise * (-2.0 * ibp).exp2()
                    + p.adc_noise * (-2.0 * abp).exp2() * css.log2());
        }

        let accuracy = 100.0 * p.accuracy_ceiling * (1.0 - error_budget.min(1.0));
        let utilization = 100.0 * used_cells / allocated_cells;
        ObjectiveVector::new(vec![accuracy, area, latency, energy, utilization])
    }
}

impl Evaluator for CimEvaluator {
    fn objective_names(&self) -> &[String] {
        &self.names
    }

    fn senses(&self) -> &[Sense] {
        &self.senses
    }

    fn evaluate(&self, point: &DesignPoint) -> Result<ObjectiveVector> {
        let out = self.compute(point)?;
        self.queries.fetch_add(1, Ordering::Relaxed);
        Ok(out)
    }

    fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use approx::assert_relative_eq;

    use super::*;
    use crate::space::{LayerKind, LayerSpec, ParameterSpec};

    fn single_layer_space(fan_in: u64, fan_out: u64, positions: u64) -> DesignSpace {
        DesignSpace::new(
            vec![LayerSpec::new(
                "l0",
                LayerKind::Conv,
                fan_in,
                fan_out,
                positions,
            )],
            vec![
                ParameterSpec::new("wbp", ParamScope::PerLayer, vec![4]),
                ParameterSpec::new("ibp", ParamScope::PerLayer, vec![3]),
                ParameterSpec::new("css", ParamScope::PerLayer, vec![256]),
                ParameterSpec::new("abp", ParamScope::Global, vec![4]),
                ParameterSpec::new("ccm", ParamScope::Global, vec![4]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn utilization_of_partially_filled_subarray() {
        // 100 rows x 100 columns in one 256x256 subarray.
        let space = single_layer_space(100, 25, 10);
        let eval = CimEvaluator::new(space, CimParams::default()).unwrap();
        let out = eval.evaluate(&DesignPoint::new(vec![0; 5])).unwrap();
        assert_relative_eq!(out.values()[4], 15.2587890625, epsilon = 1e-12);
    }

    #[test]
    fn utilization_of_exactly_filled_subarray_is_full() {
        // 256 rows x 256 columns fills one subarray exactly.
        let space = single_layer_space(256, 64, 10);
        let eval = CimEvaluator::new(space, CimParams::default()).unwrap();
        let out = eval.evaluate(&DesignPoint::new(vec![0; 5])).unwrap();
        assert_relative_eq!(out.values()[4], 100.0);
    }

    #[test]
    fn hardware_objectives_match_hand_computed_values() {
        let space = single_layer_space(100, 25, 10);
        let eval = CimEvaluator::new(space, CimParams::default()).unwrap();
        let out = eval.evaluate(&DesignPoint::new(vec![0; 5])).unwrap();
        // One subarray, adc area/energy/time scaled by 2^4; see module docs.
        assert_relative_eq!(out.values()[1], 0.02560, epsilon = 1e-12); // mm^2
        assert_relative_eq!(out.values()[2], 3.576e-4, epsilon = 1e-12); // ms
        assert_relative_eq!(out.values()[3], 7.644e-4, epsilon = 1e-12); // uJ
    }

    fn vgg8_uniform(wbp: i64, ibp: i64, css: i64, abp: i64, ccm: i64) -> DesignPoint {
        let space = DesignSpace::vgg8();
        let mut a = BTreeMap::new();
        a.insert("wbp".to_string(), wbp);
        a.insert("ibp".to_string(), ibp);
        a.insert("css".to_string(), css);
        a.insert("abp".to_string(), abp);
        a.insert("ccm".to_string(), ccm);
        space.uniform_point(&a).unwrap()
    }

    #[test]
    fn accuracy_of_the_uniform_reference_design() {
        let eval = CimEvaluator::new(DesignSpace::vgg8(), CimParams::default()).unwrap();
        let out = eval.evaluate(&vgg8_uniform(5, 5, 256, 5, 8)).unwrap();
        // error budget = 8 * 2^-10 * (0.055 + 0.62 + 8 * 0.65) = 47/1024,
        // accuracy = 97 * 977/1024.
        assert_relative_eq!(out.values()[0], 92.5478515625, epsilon = 1e-9);
    }

    #[test]
    fn column_sharing_never_touches_accuracy() {
        let eval = CimEvaluator::new(DesignSpace::vgg8(), CimParams::default()).unwrap();
        let low = eval.evaluate(&vgg8_uniform(4, 4, 128, 5, 4)).unwrap();
        let high = eval.evaluate(&vgg8_uniform(4, 4, 128, 5, 16)).unwrap();
        assert_eq!(low.values()[0], high.values()[0]);
        assert_eq!(low.values()[4], high.values()[4]);
        // More column sharing: fewer ADCs (area, energy down), slower.
        assert!(high.values()[1] < low.values()[1]);
        assert!(high.values()[3] < low.values()[3]);
        assert!(high.values()[2] > low.values()[2]);
    }

    #[test]
    fn precision_and_adc_trade_offs_point_the_right_way() {
        let eval = CimEvaluator::new(DesignSpace::vgg8(), CimParams::default()).unwrap();
        let base = eval.evaluate(&vgg8_uniform(4, 4, 128, 4, 8)).unwrap();

        let more_weight_bits = eval.evaluate(&vgg8_uniform(5, 4, 128, 4, 8)).unwrap();
        assert!(more_weight_bits.values()[0] > base.values()[0]);
        assert!(more_weight_bits.values()[1] > base.values()[1]);
        assert!(more_weight_bits.values()[3] > base.values()[3]);

        let more_input_bits = eval.evaluate(&vgg8_uniform(4, 5, 128, 4, 8)).unwrap();
        assert!(more_input_bits.values()[0] > base.values()[0]);
        assert!(more_input_bits.values()[2] > base.values()[2]);
        assert!(more_input_bits.values()[3] > base.values()[3]);

        let better_adc = eval.evaluate(&vgg8_uniform(4, 4, 128, 5, 8)).unwrap();
        assert!(better_adc.values()[0] > base.values()[0]);
        assert!(better_adc.values()[1] > base.values()[1]);
        assert!(better_adc.values()[2] > base.values()[2]);
        assert!(better_adc.values()[3] > base.values()[3]);

        // Smaller subarrays reduce ADC column noise slightly.
        let smaller_arrays = eval.evaluate(&vgg8_uniform(4, 4, 64, 4, 8)).unwrap();
        assert!(smaller_arrays.values()[0] > base.values()[0]);
    }

    #[test]
    fn query_counter_tracks_successful_evaluations() {
        let eval = CimEvaluator::new(DesignSpace::vgg8(), CimParams::default()).unwrap();
        assert_eq!(eval.query_count(), 0);
        let p = vgg8_uniform(4, 4, 128, 4, 8);
        eval.evaluate(&p).unwrap();
        eval.evaluate(&p).unwrap();
        assert_eq!(eval.query_count(), 2);
        assert!(eval.evaluate(&DesignPoint::new(vec![0; 3])).is_err());
        assert_eq!(eval.query_count(), 2);
    }

    #[test]
    fn construction_validates_space_and_params() {
        let missing = DesignSpace::grid(3, 4).unwrap();
        assert!(CimEvaluator::new(missing, CimParams::default()).is_err());

        let mut params = CimParams::default();
        params.accuracy_ceiling = 1.5;
        assert!(CimEvaluator::new(DesignSpace::vgg8(), params).is_err());

        let mut params = CimParams::default();
        params.cell_area = 0.0;
        assert!(CimEvaluator::new(DesignSpace::vgg8(), params).is_err());

        // ccm larger than the smallest subarray is rejected.
        let space = DesignSpace::new(
            vec![LayerSpec::new("l0", LayerKind::Conv, 64, 16, 4)],
            vec![
                ParameterSpec::new("wbp", ParamScope::PerLayer, vec![4]),
                ParameterSpec::new("ibp", ParamScope::PerLayer, vec![3]),
                ParameterSpec::new("css", ParamScope::PerLayer, vec![64]),
                ParameterSpec::new("abp", ParamScope::Global, vec![4]),
                ParameterSpec::new("ccm", ParamScope::Global, vec![128]),
            ],
        )
        .unwrap();
        assert!(CimEvaluator::new(space, CimParams::default()).is_err());
    }
}
