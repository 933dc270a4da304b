mod common;

use common::{bank, composed_series, max_abs, vessel};
use nalgebra::DVector;
use usvwave_core::model::wave_state_index;
use usvwave_core::{assemble_usv_model, discretize};

#[test]
fn default_model_matches_composed_fine_steps() {
    let model = assemble_usv_model(&vessel(), &bank(&[(1.0, 0.05), (1.7, 0.05)])).unwrap();
    let d = discretize(&model, 0.01).unwrap();
    let oracle = composed_series(model.matrix(), 0.01, 1000, 8);
    assert!(max_abs(&(d.matrix() - oracle)) < 1e-8);
}

#[test]
fn wave_channels_follow_the_scalar_oscillator() {
    // x1'' + 2 l w x1' + w^2 x1 = 0, underdamped, x1(0) = a, x1'(0) = b
    let comps = [(0.8, 0.1), (1.9, 0.02)];
    let model = assemble_usv_model(&vessel(), &bank(&comps)).unwrap();
    let dt = 0.01;
    let d = discretize(&model, dt).unwrap();
    let mut x = DVector::zeros(model.dim());
    let init = [(0.3, -0.2), (-0.1, 0.5)];
    let ch = 2;
    for (c, (a, b)) in init.iter().enumerate() {
        x[wave_state_index(2, ch, c, 0)] = *a;
        x[wave_state_index(2, ch, c, 1)] = *b;
    }
    let closed_form = |w: f64, l: f64, a: f64, b: f64, t: f64| {
        let s = l * w;
        let wd = w * (1.0 - l * l).sqrt();
        let (c1, c2) = (a, (b + s * a) / wd);
        let e = (-s * t).exp();
        let x1 = e * (c1 * (wd * t).cos() + c2 * (wd * t).sin());
        let x2 = e * ((-s * c1 + wd * c2) * (wd * t).cos() + (-s * c2 - wd * c1) * (wd * t).sin());
        (x1, x2)
    };
    for k in 1..=2000 {
        x = d.matrix() * &x;
        if k % 250 == 0 {
            let t = k as f64 * dt;
            let mut output = 0.0;
            for (c, ((w, l), (a, b))) in comps.iter().zip(&init).enumerate() {
                let (x1, x2) = closed_form(*w, *l, *a, *b, t);
                assert!((x[wave_state_index(2, ch, c, 0)] - x1).abs() < 1e-9);
                assert!((x[wave_state_index(2, ch, c, 1)] - x2).abs() < 1e-9);
                output += x2;
            }
            let bank_output: f64 = (0..2).map(|c| x[wave_state_index(2, ch, c, 1)]).sum();
            assert!((bank_output - output).abs() < 1e-9);
        }
    }
}

fn oscillator_energy(w: f64, x1: f64, x2: f64) -> f64 {
    w * w * x1 * x1 + x2 * x2
}

#[test]
fn undamped_component_conserves_its_energy() {
    let w = 1.3;
    let model = assemble_usv_model(&vessel(), &bank(&[(w, 0.0)])).unwrap();
    let d = discretize(&model, 0.01).unwrap();
    let mut x = DVector::zeros(model.dim());
    let (i1, i2) = (wave_state_index(1, 3, 0, 0), wave_state_index(1, 3, 0, 1));
    x[i1] = 0.2;
    x[i2] = -0.4;
    let e0 = oscillator_energy(w, x[i1], x[i2]);
    for _ in 0..10_000 {
        x = d.matrix() * &x;
    }
    let e = oscillator_energy(w, x[i1], x[i2]);
    assert!(((e - e0) / e0).abs() < 1e-6);
}

#[test]
fn damped_component_energy_never_grows() {
    let w = 1.1;
    let model = assemble_usv_model(&vessel(), &bank(&[(w, 0.08)])).unwrap();
    let d = discretize(&model, 0.01).unwrap();
    let mut x = DVector::zeros(model.dim());
    let (i1, i2) = (wave_state_index(1, 0, 0, 0), wave_state_index(1, 0, 0, 1));
    x[i1] = 1.0;
    let mut last = oscillator_energy(w, x[i1], x[i2]);
    let e0 = last;
    for _ in 0..5000 {
        x = d.matrix() * &x;
        let e = oscillator_energy(w, x[i1], x[i2]);
        assert!(e <= last * (1.0 + 1e-12));
        last = e;
    }
    // envelope exp(-2 l w t) over 50 s
    let envelope = (-2.0 * 0.08 * w * 50.0f64).exp();
    assert!(last <= e0 * envelope * 1.5 && last >= e0 * envelope / 1.5);
}
