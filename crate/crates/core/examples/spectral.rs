use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sovkit::rational::{casimir_detect, genus, random_generic_instance, spectral_curve, BracketSpec};

fn main() -> sovkit::Result<()> {
    let mut g = ChaCha8Rng::seed_from_u64(1);
    for (r, n) in [(2, 2), (3, 1), (3, 2)] {
        let phi = random_generic_instance(r, n, &mut g);
        let curve = spectral_curve(&phi);
        let split = casimir_detect(&phi, &BracketSpec::linear());
        println!("r = {r}, n = {n}: genus {}", genus(&phi)?);
        println!("  Hamiltonians {:?}", split.hamiltonians);
        println!("  Casimirs     {:?}", split.casimirs);
        for &(k, l) in split.hamiltonians.iter().take(2) {
            println!("  coefficient of xi^{k} z^{l}: {:.6}", curve.coefficient(k, l));
        }
    }
    Ok(())
}
