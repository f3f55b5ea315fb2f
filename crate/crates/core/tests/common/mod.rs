#![allow(dead_code)]

use tsagg_core::model::{db_to_linear, enumerate_combinations};
use tsagg_core::{validate_inputs, zipf_popularity, CacheDesign, Model, NetworkConfig, Popularity, SchemeConfig};

pub fn reference_net() -> NetworkConfig {
    NetworkConfig {
        lambda_b: 0.01,
        lambda_u: 0.1,
        alpha: 4.0,
        bandwidth_w: 1e7,
        snr_ratio: db_to_linear(30.0),
    }
}

pub fn reference(period_t: u32, rate_theta: f64) -> Model {
    let combos = enumerate_combinations(5, 4).unwrap();
    validate_inputs(
        reference_net(),
        zipf_popularity(5, 2.0).unwrap(),
        CacheDesign::dense(&combos, &[0.7, 0.2, 0.06, 0.02, 0.02]).unwrap(),
        SchemeConfig { period_t, rate_theta },
    )
    .unwrap()
}

/// Two files both cached everywhere, popularity (0.8, 0.2).
pub fn two_file(period_t: u32) -> Model {
    let combos = enumerate_combinations(2, 2).unwrap();
    validate_inputs(
        NetworkConfig {
            lambda_b: 0.01,
            lambda_u: 0.1,
            alpha: 4.0,
            bandwidth_w: 1e7,
            snr_ratio: 1000.0,
        },
        Popularity::new(vec![0.8, 0.2]),
        CacheDesign::dense(&combos, &[1.0]).unwrap(),
        SchemeConfig {
            period_t,
            rate_theta: 1e6,
        },
    )
    .unwrap()
}
