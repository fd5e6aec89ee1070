//! Times ray enumeration and full certification for the given `n`.

use std::time::Instant;

use symnef::cone::{extremal_rays, ray_divisor};
use symnef::pipeline::{certify, verify, Mode};

fn main() {
    let sample: usize = std::env::var("SAMPLE").ok().and_then(|s| s.parse().ok()).unwrap_or(usize::MAX);
    for n in std::env::args().skip(1) {
        let n: usize = n.parse().expect("n is an integer");
        let start = Instant::now();
        let cone = match extremal_rays(n) {
            Ok(cone) => cone,
            Err(e) => {
                println!("n={n} error {e} after {:?}", start.elapsed());
                continue;
            }
        };
        let rays = cone.rays.unwrap();
        println!("n={n} facets={} rays={} in {:?}", cone.facets.len(), rays.len(), start.elapsed());
        let start = Instant::now();
        let step = (rays.len() / sample.min(rays.len())).max(1);
        let mut checked = 0;
        for ray in rays.iter().step_by(step) {
            let cert = certify(&ray_divisor(n, ray).unwrap(), Mode::AllPartitions).expect("ray certifies");
            verify(&cert).expect("certificate verifies");
            checked += 1;
        }
        println!("n={n} certified {checked} rays in {:?}", start.elapsed());
    }
}
