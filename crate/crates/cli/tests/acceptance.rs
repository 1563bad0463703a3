//! One line per acceptance criterion; exits nonzero if any fails.

use intertwine_cli::selftest;

fn main() {
    let out = selftest::run(&[]);
    for o in &out {
        println!("{}", selftest::line(o));
    }
    let failed: Vec<u32> = out.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    println!("acceptance: {}/{} passed", out.len() - failed.len(), out.len());
    if !failed.is_empty() {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
