use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sovkit::elliptic::{assemble_lax, elliptic_divisor_coords, elliptic_genus, random_coeffs, slr_reduce, EllipticDivisor};
use sovkit::theta::{BasicSection, ThetaParams};
use sovkit::C64;

fn main() -> sovkit::Result<()> {
    let mut g = ChaCha8Rng::seed_from_u64(4);
    let p = ThetaParams::new(C64::new(0.1, 1.0), 2)?;
    let divisor = EllipticDivisor::simple(&[p.from_skew(0.2, 0.15), p.from_skew(0.57, 0.56)], &p)?;
    let lax = assemble_lax(random_coeffs(&divisor, 2, &mut g), &divisor, &p, C64::new(0.05, 0.02))?;
    let (genus, _) = elliptic_genus(&lax)?;
    let coords = elliptic_divisor_coords(&lax, &BasicSection::new(&p)?)?;
    println!("genus {genus}; {} points (expected {})", coords.points.len(), coords.expected);
    for pt in &coords.points {
        println!("  z = {:.6}  xi = {:.6}  sheet {}", pt.z, pt.xi, pt.sheet);
    }
    let pairs: Vec<(C64, C64)> = coords.points.iter().map(|pt| (pt.z, pt.xi)).collect();
    for (z, xi) in slr_reduce(&pairs)? {
        println!("  reduced z = {z:.6}  xi = {xi:.6}");
    }
    Ok(())
}
