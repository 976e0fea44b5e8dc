use jamdet::simulator::*;
use jamdet::dataset::Label;

fn main() {
    let cfg = LeachConfig { num_nodes: 60, rounds: 150, seed: 7, ..LeachConfig::default() };
    let jammers = default_jammers(cfg.rounds);
    for j in &jammers { println!("{:?} {:?} power {}", j.kind, j.active_rounds, j.power); }
    let mut net = Network::new(cfg, &jammers).unwrap();
    for r in 0..cfg.rounds {
        let recs = net.run_round().unwrap();
        let reactive = recs.iter().filter(|x| x.label == Label::ReactiveJamming).count();
        let ch_count = recs.iter().filter(|x| x.is_ch == 1.0).count();
        if r >= 130 {
            println!("round {r}: reactive {reactive}, CHs {ch_count}");
        }
    }
}
