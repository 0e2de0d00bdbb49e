use std::path::PathBuf;

use mpnls_cli::config::{
    to_json, Exponent, ForcingConfig, GridConfig, MultipointEntry, NonlinearityConfig, OutputConfig, ProfileConfig,
    TimeConfig, Tolerances, VerifyConfig,
};
use mpnls_cli::{parse_config, SolveConfig};
use proptest::collection::vec;
use proptest::option;
use proptest::prelude::*;

fn profile() -> impl Strategy<Value = ProfileConfig> {
    prop_oneof![
        (-5.0..5.0f64, 0.1..3.0f64, proptest::bool::ANY, -2.0..2.0f64).prop_map(|(amplitude, width, centred, c)| {
            ProfileConfig::Gaussian { amplitude, width, center: if centred { vec![] } else { vec![c] } }
        }),
        (-5.0..5.0f64, -8i32..8).prop_map(|(amplitude, k)| ProfileConfig::PlaneWave { amplitude, modes: vec![k as f64] }),
        "[a-z]{1,8}".prop_map(|name| ProfileConfig::FromFile { path: PathBuf::from(format!("{name}.fld")) }),
    ]
}

prop_compose! {
    fn config()(
        a in 0.1..4.0f64,
        half_n in 2usize..64,
        half_width in 0.5..50.0f64,
        t0 in -2.0..2.0f64,
        span in 0.1..5.0f64,
        nt in 4usize..200,
        alphas in vec((-1.0..1.0f64, -1.0..1.0f64), 0..3),
        initial in profile(),
        forcing in option::of((-2.0..2.0f64, -8i32..8, -3.0..3.0f64)),
        nonlinearity in option::of((-2.0..2.0f64, 0.5..4.0f64)),
        s in 0.0..1.0f64,
        sigma in option::of(2.0..10.0f64),
        eps_res in 1e-12..1e-4f64,
        tol_fp in 1e-14..1e-6f64,
        max_iter in 1usize..100,
        fields in proptest::bool::ANY,
        verify in option::of((vec(0.1..2.0f64, 0..4), option::of(2.0..10.0f64), 1usize..30, any::<u64>())),
    ) -> SolveConfig {
        // Distinct on-grid λ: frames nt, nt-1, ...
        let multipoint = alphas
            .iter()
            .enumerate()
            .map(|(k, &(re, im))| MultipointEntry {
                alpha_re: re,
                alpha_im: im,
                lambda: if k == 0 { t0 + span } else { t0 + span * (nt - k) as f64 / nt as f64 },
            })
            .collect();
        let verify = verify.map(|(steps, p, samples, seed)| {
            let mut t = 0.0;
            let times = steps.iter().map(|d| { t += d; t }).collect();
            VerifyConfig { times, p: Exponent(p.unwrap_or(f64::INFINITY)), samples, seed }
        });
        SolveConfig {
            symbol: vec![vec![a]],
            grid: GridConfig { n: 1, points: 2 * half_n, half_width },
            time: TimeConfig { t0, t_end: t0 + span, nt },
            multipoint,
            initial,
            forcing: forcing.map(|(amplitude, k, omega)| ForcingConfig {
                profile: ProfileConfig::PlaneWave { amplitude, modes: vec![k as f64] },
                omega,
            }),
            nonlinearity: nonlinearity.map(|(lambda, p)| NonlinearityConfig { lambda, p }),
            s,
            sigma,
            tolerances: Tolerances { eps_res, tol_fp, max_iter },
            outputs: OutputConfig {
                report_path: PathBuf::from("out"),
                fields_path: fields.then(|| PathBuf::from("out/fields")),
                frames: fields.then(|| vec![0, nt]),
            },
            verify,
        }
    }
}

proptest! {
    #[test]
    fn serialize_then_parse_is_identity(config in config()) {
        let text = to_json(&config);
        let parsed = parse_config(&text);
        prop_assert!(parsed.is_ok(), "{:?}\n{}", parsed, text);
        let parsed = parsed.unwrap();
        prop_assert_eq!(&parsed, &config);
        prop_assert_eq!(to_json(&parsed), text);
    }
}
