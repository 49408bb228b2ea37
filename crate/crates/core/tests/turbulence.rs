use std::f64::consts::PI;

use vortex_ao_core::turbulence::{derive_seed, screen_spectrum, screen_variance};
use vortex_ao_core::{
    make_screen, standard_levels, Complex64, GridSpec, ScreenRng, TurbulenceParams,
};

const ENSEMBLE: u64 = 200;

#[test]
fn index_spectrum_matches_high_precision_value() {
    // 40-digit evaluation of the closed form, term by term.
    let expected_index = 5.280576716126818471733687244536722578874e-22;
    let expected_phase = 9.806968857649329526312212350423807553221e-6;
    let p = TurbulenceParams::from_cn2(1e-14, -2.5, 1e-3, 30.0, 633e-9).unwrap();
    let got = p.index_spectrum(100.0).unwrap();
    assert!(
        (got - expected_index).abs() / expected_index < 1e-13,
        "{got:e}"
    );
    let got = p.phase_spectrum(100.0).unwrap();
    assert!(
        (got - expected_phase).abs() / expected_phase < 1e-13,
        "{got:e}"
    );
}

#[test]
fn spectrum_curves_ordered_by_strength() {
    let g = GridSpec::desk(64).unwrap();
    let levels = standard_levels();
    let mut kappa = 2.0 * PI / g.side();
    while kappa <= PI / g.dx() {
        let vals: Vec<f64> = levels
            .iter()
            .map(|p| p.phase_spectrum(kappa).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[0] < w[1]), "kappa={kappa}");
        kappa *= 1.1;
    }
}

struct Ensemble {
    pixel_var: f64,
    var_x: f64,
    var_y: f64,
}

/// Pixel variance plus variance of the row-mean and column-mean profiles.
fn ensemble(p: &TurbulenceParams, g: &GridSpec) -> Ensemble {
    let n = g.n();
    let (mut pix, mut vx, mut vy) = (0.0, 0.0, 0.0);
    for s in 0..ENSEMBLE {
        let scr = make_screen(p, g, &mut ScreenRng::new(derive_seed(77, s)));
        let ph = scr.phase();
        pix += ph.iter().map(|v| v * v).sum::<f64>() / ph.len() as f64;
        // phase differences along x and along y at unit lag
        let (mut dx2, mut dy2) = (0.0, 0.0);
        for r in 0..n {
            for c in 0..n {
                let v = ph[r * n + c];
                dx2 += (ph[r * n + (c + 1) % n] - v).powi(2);
                dy2 += (ph[((r + 1) % n) * n + c] - v).powi(2);
            }
        }
        vx += dx2 / ph.len() as f64;
        vy += dy2 / ph.len() as f64;
    }
    let m = ENSEMBLE as f64;
    Ensemble {
        pixel_var: pix / m,
        var_x: vx / m,
        var_y: vy / m,
    }
}

#[test]
fn ensemble_statistics_at_standard_levels() {
    let g = GridSpec::desk(64).unwrap();
    let mut previous = 0.0;
    for p in standard_levels() {
        let e = ensemble(&p, &g);
        let oracle = screen_variance(&p, &g);
        let rel = (e.pixel_var - oracle).abs() / oracle;
        assert!(
            rel < 0.10,
            "cn2={:e}: {} vs {}",
            p.cn2(),
            e.pixel_var,
            oracle
        );
        assert!(e.pixel_var > previous);
        previous = e.pixel_var;
        let aniso = (e.var_x - e.var_y).abs() / e.var_y;
        assert!(aniso < 0.15, "structure anisotropy {aniso}");
    }
}

#[test]
fn screen_is_real_part_of_the_synthesis_sum() {
    let g = GridSpec::desk(16).unwrap();
    let p = standard_levels()[2];
    let n = g.n();
    let spec = screen_spectrum(&p, &g, &mut ScreenRng::new(5));
    let screen = make_screen(&p, &g, &mut ScreenRng::new(5));
    let mut full = vec![Complex64::new(0.0, 0.0); n * n];
    for (idx, out) in full.iter_mut().enumerate() {
        let (r, c) = (idx / n, idx % n);
        for (jdx, s) in spec.iter().enumerate() {
            let (kr, kc) = (jdx / n, jdx % n);
            let arg = -2.0 * PI * ((r * kr + c * kc) % n) as f64 / n as f64;
            *out += s * Complex64::from_polar(1.0, arg);
        }
    }
    let mean = full.iter().map(|v| v.re).sum::<f64>() / full.len() as f64;
    let scale = full.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
    for (a, b) in screen.phase().iter().zip(&full) {
        assert!((a - (b.re - mean)).abs() < 1e-12 * scale);
    }
    assert!(screen.mean().abs() < 1e-12);
}
