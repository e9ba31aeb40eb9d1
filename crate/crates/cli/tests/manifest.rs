use proptest::prelude::*;
use stochstab::config::{LangmuirConfig, MomentsConfig, RunConfig, SimulateConfig};
use stochstab::grid::Axis;
use stochstab::{RunManifest, SystemSpec};

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e3..1e3f64,
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
    ]
}

fn system() -> impl Strategy<Value = SystemSpec> {
    (1usize..4, 0usize..3).prop_flat_map(|(n, a)| {
        let mat = move || proptest::collection::vec(proptest::collection::vec(finite(), n), n);
        (mat(), proptest::collection::vec(mat(), a)).prop_map(move |(drift, noise)| SystemSpec {
            dim: n,
            noise_count: a,
            drift,
            noise,
        })
    })
}

fn config() -> impl Strategy<Value = RunConfig> {
    prop_oneof![
        (system(), 1usize..8, 1usize..100_000).prop_map(|(system, degree, max_basis)| {
            RunConfig::Moments(MomentsConfig {
                system,
                degree,
                max_basis,
            })
        }),
        (system(), finite(), finite(), any::<u64>(), any::<u64>()).prop_map(|(system, dt, horizon, paths, seed)| {
            RunConfig::Simulate(SimulateConfig {
                initial_state: vec![1.0; system.dim],
                system,
                degrees: vec![2, 4],
                dt,
                horizon,
                paths,
                seed,
                sample_count: 512,
                fit_window: 0.5,
                max_basis: 20_000,
            })
        }),
        (finite(), finite(), finite(), 1usize..50, proptest::option::of(finite())).prop_map(
            |(mass, a, b, count, k2)| {
                RunConfig::Langmuir(LangmuirConfig::Dispersion {
                    mass,
                    k: Axis {
                        start: a,
                        stop: b,
                        count,
                    },
                    k2,
                    sigma2: Axis::point(b),
                })
            }
        ),
    ]
}

proptest! {
    #[test]
    fn manifest_round_trips(cfg in config(), secs in 0.0..1e4f64) {
        let m = RunManifest::new(cfg, vec!["out.csv".into()], secs);
        let back = RunManifest::from_json(&m.to_json()).unwrap();
        prop_assert_eq!(back, m);
    }
}

#[test]
fn rejects_unknown_fields() {
    let m = RunManifest::new(
        RunConfig::Langmuir(LangmuirConfig::Appendix {
            eps1: Axis::point(1.0),
            eps2: Axis::point(2.0),
            sigma2: Axis::point(0.0),
        }),
        vec![],
        0.0,
    );
    let text = m.to_json().replacen("\"tool\"", "\"extra\": 1, \"tool\"", 1);
    assert!(RunManifest::from_json(&text).is_err());
}
