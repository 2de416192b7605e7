//! Fleet conversion instances: tours, vehicle models, synthetic generation
//! and the JSON file format.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::substream;

/// A tour that has to be carried out by a single physical vehicle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tour {
    pub id: usize,
    /// Departure time in minutes.
    pub t_d: f64,
    /// Arrival time in minutes.
    pub t_a: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_a: Option<usize>,
    /// Vehicle models allowed to perform this tour.
    pub allowed_models: Vec<usize>,
}

impl Tour {
    pub fn allows(&self, model: usize) -> bool {
        self.allowed_models.contains(&model)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleModel {
    pub id: usize,
    /// Cost of purchasing one vehicle of this model.
    pub purchase_cost: f64,
    /// Operational cost of running each tour with this model, keyed by tour id.
    pub op_cost: BTreeMap<usize, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetInstance {
    pub tours: Vec<Tour>,
    pub models: Vec<VehicleModel>,
    /// Travel time between locations in minutes, one row per origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub travel_time: Option<Vec<Vec<f64>>>,
}

impl FleetInstance {
    /// Builds an instance and checks every invariant.
    pub fn new(
        tours: Vec<Tour>,
        models: Vec<VehicleModel>,
        travel_time: Option<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let instance = FleetInstance {
            tours,
            models,
            travel_time,
        };
        instance.validate()?;
        Ok(instance)
    }

    pub fn n_tours(&self) -> usize {
        self.tours.len()
    }

    pub fn n_models(&self) -> usize {
        self.models.len()
    }

    /// Operational cost `w` of running `tour` with `model`.
    pub fn op_cost(&self, tour: usize, model: usize) -> f64 {
        self.models[model].op_cost[&tour]
    }

    pub fn purchase_cost(&self, model: usize) -> f64 {
        self.models[model].purchase_cost
    }

    /// Travel time from location `from` to location `to`; zero when no matrix
    /// is attached or a location is unknown.
    pub fn travel(&self, from: Option<usize>, to: Option<usize>) -> Result<f64> {
        let (Some(tt), Some(from), Some(to)) = (&self.travel_time, from, to) else {
            return Ok(0.0);
        };
        tt.get(from)
            .and_then(|row| row.get(to))
            .copied()
            .ok_or_else(|| {
                Error::InvalidInstance(format!(
                    "location pair ({from}, {to}) outside travel_time of size {}",
                    tt.len()
                ))
            })
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidInstance(msg));
        for (idx, model) in self.models.iter().enumerate() {
            if model.id != idx {
                return invalid(format!("model at position {idx} has id {}", model.id));
            }
            if !(model.purchase_cost > 0.0) || !model.purchase_cost.is_finite() {
                return invalid(format!(
                    "model {idx}: purchase_cost must be positive, got {}",
                    model.purchase_cost
                ));
            }
        }
        let n_locations = self.travel_time.as_ref().map(|tt| tt.len());
        for (idx, tour) in self.tours.iter().enumerate() {
            if tour.id != idx {
                return invalid(format!("tour at position {idx} has id {}", tour.id));
            }
            if !tour.t_d.is_finite() || !tour.t_a.is_finite() || tour.t_d < 0.0 {
                return invalid(format!("tour {idx}: times must be finite and non-negative"));
            }
            if tour.t_a <= tour.t_d {
                return invalid(format!(
                    "tour {idx}: t_a ({}) must exceed t_d ({})",
                    tour.t_a, tour.t_d
                ));
            }
            if tour.allowed_models.is_empty() {
                return invalid(format!("tour {idx}: allowed_models is empty"));
            }
            for &m in &tour.allowed_models {
                if m >= self.models.len() {
                    return invalid(format!("tour {idx}: unknown model {m} in allowed_models"));
                }
            }
            if let Some(n_loc) = n_locations {
                for loc in [tour.l_d, tour.l_a].into_iter().flatten() {
                    if loc >= n_loc {
                        return invalid(format!(
                            "tour {idx}: location {loc} outside travel_time of size {n_loc}"
                        ));
                    }
                }
            }
            for model in &self.models {
                match model.op_cost.get(&idx) {
                    Some(w) if w.is_finite() && *w >= 0.0 => {}
                    Some(w) => {
                        return invalid(format!(
                            "model {}: op_cost for tour {idx} must be non-negative, got {w}",
                            model.id
                        ))
                    }
                    None => {
                        return invalid(format!("model {}: op_cost missing tour {idx}", model.id))
                    }
                }
            }
        }
        for model in &self.models {
            if let Some((&k, _)) = model.op_cost.range(self.tours.len()..).next() {
                return invalid(format!("model {}: op_cost for unknown tour {k}", model.id));
            }
        }
        if let Some(tt) = &self.travel_time {
            for (i, row) in tt.iter().enumerate() {
                if row.len() != tt.len() {
                    return invalid(format!("travel_time row {i} has {} entries", row.len()));
                }
                for (j, &v) in row.iter().enumerate() {
                    if !v.is_finite() || v < 0.0 {
                        return invalid(format!("travel_time[{i}][{j}] = {v} is negative"));
                    }
                    if i == j && v != 0.0 {
                        return invalid(format!("travel_time diagonal entry {i} is {v}"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Distributions used by [`generate_instance_with`].
///
/// Departures are uniform over `[0, horizon)`, durations uniform over
/// `duration`, purchase costs uniform over `purchase_cost` and operational
/// costs uniform over `op_cost` independently for each (tour, model) pair.
/// No locations are generated.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub horizon: f64,
    pub duration: (f64, f64),
    pub purchase_cost: (f64, f64),
    pub op_cost: (f64, f64),
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            horizon: 1440.0,
            duration: (60.0, 240.0),
            purchase_cost: (4.0, 8.0),
            op_cost: (0.5, 2.0),
        }
    }
}

pub fn generate_instance(
    n_tours: usize,
    n_models: usize,
    allowed_per_tour: usize,
    seed: u64,
) -> Result<FleetInstance> {
    generate_instance_with(
        &GeneratorConfig::default(),
        n_tours,
        n_models,
        allowed_per_tour,
        seed,
    )
}

pub fn generate_instance_with(
    config: &GeneratorConfig,
    n_tours: usize,
    n_models: usize,
    allowed_per_tour: usize,
    seed: u64,
) -> Result<FleetInstance> {
    if n_tours == 0 {
        return Err(Error::Parameter("n_tours must be at least 1".into()));
    }
    if allowed_per_tour == 0 || allowed_per_tour > n_models {
        return Err(Error::Parameter(format!(
            "allowed_per_tour must lie in 1..={n_models}, got {allowed_per_tour}"
        )));
    }
    let (d_lo, d_hi) = config.duration;
    if !(config.horizon > 0.0 && d_lo > 0.0 && d_hi >= d_lo) {
        return Err(Error::Parameter("invalid horizon or duration range".into()));
    }

    let mut rng = substream(seed, "instance", &[]);
    let mut uniform = |(lo, hi): (f64, f64)| {
        if hi > lo {
            rng.random_range(lo..hi)
        } else {
            lo
        }
    };

    let mut windows = Vec::with_capacity(n_tours);
    for _ in 0..n_tours {
        let t_d = uniform((0.0, config.horizon));
        let duration = uniform(config.duration);
        windows.push((t_d, t_d + duration));
    }
    let mut costs = Vec::with_capacity(n_models);
    for _ in 0..n_models {
        let gamma = uniform(config.purchase_cost);
        let op: BTreeMap<usize, f64> = (0..n_tours).map(|k| (k, uniform(config.op_cost))).collect();
        costs.push((gamma, op));
    }

    let mut rng = substream(seed, "allowed", &[]);
    let tours = windows
        .into_iter()
        .enumerate()
        .map(|(id, (t_d, t_a))| {
            let mut allowed = sample(&mut rng, n_models, allowed_per_tour).into_vec();
            allowed.sort_unstable();
            Tour {
                id,
                t_d,
                t_a,
                l_d: None,
                l_a: None,
                allowed_models: allowed,
            }
        })
        .collect();
    let models = costs
        .into_iter()
        .enumerate()
        .map(|(id, (purchase_cost, op_cost))| VehicleModel {
            id,
            purchase_cost,
            op_cost,
        })
        .collect();
    FleetInstance::new(tours, models, None)
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<FleetInstance> {
    let text = fs::read_to_string(path)?;
    parse_instance(&text)
}

pub fn parse_instance(text: &str) -> Result<FleetInstance> {
    let instance: FleetInstance =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    instance.validate()?;
    Ok(instance)
}

pub fn write_instance(instance: &FleetInstance, path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(instance).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(path, text)?;
    Ok(())
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_shape() {
        let inst = generate_instance(32, 5, 3, 11).unwrap();
        assert_eq!(inst.n_tours(), 32);
        assert_eq!(inst.n_models(), 5);
        for tour in &inst.tours {
            assert_eq!(tour.allowed_models.len(), 3);
            assert!(tour.t_a > tour.t_d);
        }
    }

    #[test]
    fn generator_is_deterministic() {
        assert_eq!(
            generate_instance(20, 4, 2, 5).unwrap(),
            generate_instance(20, 4, 2, 5).unwrap()
        );
        assert_ne!(
            generate_instance(20, 4, 2, 5).unwrap(),
            generate_instance(20, 4, 2, 6).unwrap()
        );
    }

    #[test]
    fn generator_rejects_bad_parameters() {
        assert!(matches!(generate_instance(10, 5, 6, 0), Err(Error::Parameter(_))));
        assert!(matches!(generate_instance(0, 5, 3, 0), Err(Error::Parameter(_))));
        assert!(matches!(generate_instance(10, 5, 0, 0), Err(Error::Parameter(_))));
    }

    #[test]
    fn file_round_trip() {
        let inst = generate_instance(16, 3, 2, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.json");
        write_instance(&inst, &path).unwrap();
        assert_eq!(read_instance(&path).unwrap(), inst);
    }

    #[test]
    fn missing_tours_key_is_a_parse_error() {
        let err = parse_instance(r#"{"models": []}"#).unwrap_err();
        match err {
            Error::Parse(msg) => assert!(msg.contains("tours"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inverted_window_is_rejected() {
        let text = r#"{
            "tours": [{"id": 0, "t_d": 10.0, "t_a": 10.0, "allowed_models": [0]}],
            "models": [{"id": 0, "purchase_cost": 1.0, "op_cost": {"0": 1.0}}]
        }"#;
        match parse_instance(text).unwrap_err() {
            Error::InvalidInstance(msg) => assert!(msg.contains("t_a"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn travel_time_is_validated() {
        let mut inst = fixtures::windows(&[(0.0, 10.0)], 1.0, 1.0);
        inst.travel_time = Some(vec![vec![0.0, 5.0], vec![-1.0, 0.0]]);
        assert!(inst.validate().is_err());
        inst.travel_time = Some(vec![vec![1.0]]);
        assert!(inst.validate().is_err());
        inst.travel_time = Some(vec![vec![0.0]]);
        inst.tours[0].l_d = Some(3);
        assert!(inst.validate().is_err());
    }

    #[test]
    fn missing_op_cost_is_rejected() {
        let mut inst = fixtures::windows(&[(0.0, 10.0), (20.0, 30.0)], 1.0, 1.0);
        inst.models[0].op_cost.remove(&1);
        assert!(matches!(inst.validate(), Err(Error::InvalidInstance(_))));
    }
}
