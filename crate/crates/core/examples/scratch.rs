use critmet::dynamics::*;
use critmet::metrology::{chi_perturbation_sum, chi_symmetric_pair};
use critmet::model::ChainParams;

fn main() {
    let p8 = ChainParams::new(8, 0.0, 0.0).unwrap();
    let chi_pert = chi_perturbation_sum(&p8).unwrap().chi_f;
    let chi_fd = chi_symmetric_pair(&p8, 1e-4).unwrap();
    println!("chi_pert(8) = {chi_pert:.8}  chi_fd = {chi_fd:.8}");

    // fine scan of the plateau ratio around t = 20 N, two deltas, forced step counts
    for delta in [1e-3, 3e-4] {
        for t in [120.0, 140.0, 150.0, 155.0, 160.0, 165.0, 170.0, 180.0, 200.0, 320.0, 640.0] {
            let r = RampProtocol::linear(delta, t, ((4.0 * t) as usize).max(64));
            let g = qfi_time(&p8, &r).unwrap();
            println!("delta={delta:.0e} t={t:6.1}: ratio = {:.6}", g / (4.0 * chi_pert));
        }
    }
}
