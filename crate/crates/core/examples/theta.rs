use sovkit::theta::{riemann_theta, BasicSection, ThetaParams};
use sovkit::C64;

fn main() -> sovkit::Result<()> {
    let tau = C64::new(0.2, 1.1);
    let p1 = ThetaParams::new(tau, 1)?;
    let z = C64::new(0.31, 0.17);
    let shifted = riemann_theta(z + tau, &p1);
    let factor = (-std::f64::consts::PI * C64::i() * (tau + 2.0 * z)).exp();
    println!("theta(z + tau) / (q theta(z)) - 1 = {:.1e}", (shifted / (factor * riemann_theta(z, &p1)) - 1.0).norm());
    println!("theta at the half period: {:.1e}", riemann_theta((tau + 1.0) * 0.5, &p1).norm());

    let p = ThetaParams::new(tau, 3)?;
    let sec = BasicSection::new(&p)?;
    for w in [C64::new(0.1, 0.05), C64::new(0.2, 0.3)] {
        let s = sec.at(w)?;
        println!("s({w:.2}) = {:.6?}", s.values);
    }
    Ok(())
}
