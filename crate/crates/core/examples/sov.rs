use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sovkit::rational::{divisor_coords, random_generic_instance, verify_canonical, BracketSpec};
use sovkit::C64;

fn main() -> sovkit::Result<()> {
    let mut g = ChaCha8Rng::seed_from_u64(2);
    let phi = random_generic_instance(3, 2, &mut g);
    let s = [C64::new(1.0, 0.0), C64::new(0.4, -0.3), C64::new(-0.2, 0.7)];
    let d = divisor_coords(&phi, &s)?;
    println!("{} divisor points", d.count);
    for (z, xi) in &d.points {
        println!("  z = {z:.6}  xi = {xi:.6}");
    }
    for (name, spec) in [("linear", BracketSpec::linear()), ("quadratic", BracketSpec::quadratic())] {
        let rep = verify_canonical(&phi, &spec, &s)?;
        println!(
            "{name}: {{z, xi}} off by {:.2e}, {{z, z}} {:.2e}, {{xi, xi}} {:.2e}",
            rep.max_z_xi_residual, rep.max_z_z, rep.max_xi_xi
        );
    }
    Ok(())
}
