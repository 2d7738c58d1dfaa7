//! Writes a seeded suite to a temporary directory and benchmarks it.

use gebp::harness::bench::{instance_paths, run_bench, summarize, write_csv};
use gebp::harness::files::InstanceFile;
use gebp::harness::gen::{generate, GenClass, Generated};
use gebp::harness::Algo;
use gebp::model::Epsilon;
use gebp::rational::ratio;

fn main() {
    let dir = std::env::temp_dir().join(format!("gebp-suite-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for seed in 0..6 {
        let Generated::Instance(inst) = generate(seed, 6, 3, GenClass::Ebp) else { unreachable!() };
        let path = dir.join(format!("ebp{seed:02}.json"));
        std::fs::write(path, InstanceFile::from_instance(&inst, None).to_json()).unwrap();
    }

    let paths = instance_paths(&dir).unwrap();
    let rows = run_bench(&paths, &[Algo::Greedy, Algo::Lpt, Algo::Eptas], Epsilon::new(2).unwrap(), 1_000_000);
    write_csv(&rows, std::io::stdout()).unwrap();
    println!("{}", summarize(&rows, Some(&ratio(5, 4))).line());
    std::fs::remove_dir_all(&dir).unwrap();
}
