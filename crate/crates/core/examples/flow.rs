use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sovkit::rational::{casimir_detect, linearize_flow, random_generic_instance, spectral_curve, BracketSpec};
use sovkit::C64;

fn main() -> sovkit::Result<()> {
    let mut g = ChaCha8Rng::seed_from_u64(3);
    let phi = random_generic_instance(2, 2, &mut g);
    let spec = BracketSpec::linear();
    let hams = casimir_detect(&phi, &spec).hamiltonians;
    let times: Vec<f64> = (0..6).map(|i| 0.1 * i as f64).collect();
    let s = [C64::new(1.0, 0.0), C64::new(0.3, 0.5)];
    let (traj, tab) = linearize_flow(&phi, hams[0], &spec, &times, C64::new(2.5, 2.5), &s, &hams)?;
    let c0 = spectral_curve(&phi).values();
    for (t, p) in times.iter().zip(&traj) {
        let drift = c0.iter().zip(spectral_curve(p).values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        println!("t = {t:.1}  spectral drift {drift:.1e}");
    }
    for (i, h) in hams.iter().enumerate() {
        println!("Q for {h:?}: slope {:.6}, fit residual {:.1e}", tab.slopes[i], tab.fit_residual[i]);
    }
    Ok(())
}
