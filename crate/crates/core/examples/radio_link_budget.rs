//! Link budget, SNR and ranging variance against distance, LOS and NLOS.
//!
//!     cargo run --example radio_link_budget

use pitnav::radio::{measure, rssi_reward, RadioConfig};

fn main() {
    let cfg = RadioConfig::default();
    println!(
        "noise floor {:.1} dBm, P_r,max {:.2} dBm",
        cfg.noise_power_dbm(),
        cfg.max_received_power_dbm()
    );
    println!(
        "{:>6} {:>5} {:>9} {:>10} {:>12} {:>9}",
        "d [m]", "link", "P_r [dBm]", "SNR [dB]", "var [m^2]", "rssi"
    );
    for d in [1.0, 2.0, 5.0, 10.0, 20.0, 40.0] {
        for los in [true, false] {
            let m = measure(&cfg, d, los, 0.0).expect("positive SNR");
            println!(
                "{d:>6.1} {:>5} {:>9.2} {:>10.2} {:>12.3e} {:>9.2e}",
                if los { "LOS" } else { "NLOS" },
                m.p_r_dbm,
                10.0 * m.snr.log10(),
                m.var_range,
                rssi_reward(&cfg, m.p_r_dbm)
            );
        }
    }
}
