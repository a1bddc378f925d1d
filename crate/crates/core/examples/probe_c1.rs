use mbm_core::field::*;
use mbm_core::grid::TimeGrid;
use mbm_core::hurst::HurstFunction;
use mbm_core::noise::gen_brownian;
use mbm_core::grid::SampledPath;

fn sup_ratio(s: &MbmPath, o: &MbmPath) -> f64 {
    let num = s.values().iter().zip(o.values()).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
    let den = o.values().iter().map(|v| v.abs()).fold(0.0f64, f64::max);
    num / den
}

fn main() {
    let t0 = std::time::Instant::now();
    let grid = TimeGrid::new(-21.0, 21.0, 2f64.powi(-14)).unwrap();
    let bm_fine = gen_brownian(&grid, 11);
    let bm = bm_fine.restrict_by(2).unwrap();
    let q = QuadratureConfig::default();
    println!("gen: {:?}", t0.elapsed());
    let eval_grid = TimeGrid::new(0.90625, 1.0, 2f64.powi(-13)).unwrap();
    for &h in &[0.3, 0.7] {
        let hf = HurstFunction::constant(h).unwrap();
        let t1 = std::time::Instant::now();
        let s = mbm_sample(&eval_grid, &hf, 1.0, 0.0, &bm, &q).unwrap();
        let ts = t1.elapsed();
        let o = mbm_stochint_oracle(&eval_grid, &hf, 1.0, 0.0, &bm).unwrap();
        let t2 = t1.elapsed();
        let coarse = sup_ratio(&s, &o);
        let t3 = std::time::Instant::now();
        let s2 = mbm_sample(&eval_grid, &hf, 1.0, 0.0, &bm_fine, &q).unwrap();
        let o2 = mbm_stochint_oracle(&eval_grid, &hf, 1.0, 0.0, &bm_fine).unwrap();
        let fine = sup_ratio(&s2, &o2);
        println!("h={h}: coarse {coarse:.5} fine {fine:.5} (sample {ts:?}, +oracle {t2:?}, fine pair {:?})", t3.elapsed());
    }
    println!("total: {:?}", t0.elapsed());
}
