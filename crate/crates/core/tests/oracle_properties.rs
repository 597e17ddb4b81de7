use finray::dataset::{self, pearson, Dataset};
use finray::design_space::{enumerate_grid, DesignPoint, DesignSpace};
use finray::oracle::{self, OracleConfig};
use finray::pareto::compose_objectives;
use proptest::prelude::*;

fn responses(p: [f64; 3]) -> [f64; 4] {
    let d = DesignPoint::new_unchecked(p[0], p[1], p[2]);
    oracle::evaluate(&d, &OracleConfig::noise_free()).unwrap().to_array()
}

#[test]
fn thicker_beam_is_stiffer_everywhere() {
    let space = DesignSpace::<f64>::default();
    let h = 1e-6;
    for p in enumerate_grid(&space).unwrap() {
        // one-sided step keeps the probe inside the box at the upper edge
        let step = if p.t_beam + h > 4.0 { -h } else { h };
        let a = responses(p.to_array());
        let b = responses([p.t_beam + step, p.t_cross, p.spacing]);
        let dfx = (b[0] - a[0]) / step;
        let ddx = (b[2] - a[2]) / step;
        assert!(dfx > 0.0, "fx not increasing at {p:?}");
        assert!(ddx < 0.0, "dx not decreasing at {p:?}");
    }
}

#[test]
fn envelope_over_the_grid() {
    let space = DesignSpace::<f64>::default();
    for p in enumerate_grid(&space).unwrap() {
        let o = compose_objectives(responses(p.to_array()));
        assert!((4.1..=86.0).contains(&o.f), "{p:?} f={}", o.f);
        assert!((15.0..=36.41).contains(&o.d), "{p:?} d={}", o.d);
    }
}

#[test]
fn grid_has_a_real_trade_off() {
    let space = DesignSpace::<f64>::default();
    let objs: Vec<(f64, f64)> = enumerate_grid(&space)
        .unwrap()
        .iter()
        .map(|p| {
            let o = compose_objectives(responses(p.to_array()));
            (o.f, o.d)
        })
        .collect();
    let pareto = objs
        .iter()
        .filter(|a| !objs.iter().any(|b| b.0 >= a.0 && b.1 >= a.1 && (b.0 > a.0 || b.1 > a.1)))
        .count();
    assert!(pareto >= 3, "only {pareto} non-dominated grid designs");
}

#[test]
fn correlation_signs() {
    let data = oracle::generate_dataset(&DesignSpace::<f64>::default(), &OracleConfig::noise_free()).unwrap();
    let tb = data.column(0);
    assert!(pearson(&tb, &data.column(3)).unwrap() > 0.0);
    assert!(pearson(&tb, &data.column(5)).unwrap() < 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn csv_round_trip(seed in any::<u64>(), sigma in 0.0f64..0.1) {
        let space = DesignSpace::<f64>::default();
        let cfg = OracleConfig { noise_sigma: sigma, seed };
        let data = oracle::generate_dataset(&space, &cfg).unwrap();
        let mut buf = Vec::new();
        data.write_csv(&mut buf).unwrap();
        let back = Dataset::read_csv(buf.as_slice(), &space).unwrap();
        prop_assert_eq!(back.records(), data.records());
    }

    #[test]
    fn pearson_sign_follows_slope(
        x in prop::collection::vec(-100.0f64..100.0, 3..40),
        a in -5.0f64..5.0,
        b in -10.0f64..10.0,
    ) {
        let spread = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - x.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assume!(spread > 1e-3 && a.abs() > 1e-3);
        let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let r = dataset::pearson(&x, &y).unwrap();
        prop_assert!((r - a.signum()).abs() < 1e-9, "r = {}", r);
    }
}
