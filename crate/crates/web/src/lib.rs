//! WebAssembly bindings for the static demo page in `www/`.

use std::cell::RefCell;
use std::collections::BTreeMap;

use edgelat::archspace::{
    architecture_from_index, operator_multiset, BenchmarkOrder, CellArchitecture, MacroConfig, OperatorKind,
    OperatorVariant, PositionRange, NUM_EDGES,
};
use edgelat::baselines::{fit_overhead, lut_build, lut_predict};
use edgelat::harness::bound_accuracy;
use edgelat::sampler::{random_sample, targeted_uniform_sample};
use edgelat::synthdev::{make_device_pool, measure_e2e, profile_all, PoolSpec, RuntimeModel, SyntheticDevice};
use wasm_bindgen::prelude::*;

thread_local! {
    static POOL: RefCell<Option<(u64, Vec<SyntheticDevice>)>> = const { RefCell::new(None) };
}

fn device(seed: u64, index: usize) -> edgelat::Result<SyntheticDevice> {
    POOL.with(|cell| {
        let mut slot = cell.borrow_mut();
        if slot.as_ref().is_none_or(|(s, _)| *s != seed) {
            *slot = Some((seed, make_device_pool(&PoolSpec::default(), seed)?));
        }
        let pool = &slot.as_ref().expect("pool just built").1;
        pool.get(index)
            .cloned()
            .ok_or_else(|| edgelat::Error::Range(format!("device index {index} outside 0..{}", pool.len())))
    })
}

fn js(e: edgelat::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Names of the default pool's devices, in index order.
#[wasm_bindgen]
pub fn device_names() -> Vec<String> {
    PoolSpec::default().devices.into_iter().map(|d| d.id).collect()
}

#[wasm_bindgen]
pub struct Scatter {
    lut: Vec<f64>,
    truth: Vec<f64>,
    accuracy: f64,
}

#[wasm_bindgen]
impl Scatter {
    #[wasm_bindgen(getter)]
    pub fn lut(&self) -> Vec<f64> {
        self.lut.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn truth(&self) -> Vec<f64> {
        self.truth.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn accuracy(&self) -> f64 {
        self.accuracy
    }
}

/// LUT predictions against measured latency over the test positions, with
/// the device's runtime replaced by an optimizing one of the given strength
/// (`fusion_discount < 0` keeps the additive runtime).
pub fn scatter(seed: u64, index: usize, fusion_discount: f64, skip_elision: bool) -> edgelat::Result<Scatter> {
    let base = device(seed, index)?;
    let dev = if fusion_discount < 0.0 {
        base.with_runtime(RuntimeModel::additive())
    } else {
        base.with_runtime(RuntimeModel::optimized(fusion_discount, skip_elision)?)
    };
    let m = MacroConfig::default();
    let measure = |range| -> edgelat::Result<BTreeMap<usize, f64>> {
        BenchmarkOrder::canonical_range(range)?
            .into_iter()
            .map(|a| Ok((a, measure_e2e(&dev, &architecture_from_index(a)?, &m).latency_s)))
            .collect()
    };
    let train = measure(PositionRange::new(0, 899)?)?;
    let test = measure(PositionRange::new(1800, 2699)?)?;
    let lut = lut_build(dev.device_id(), &profile_all(&dev, 1000)?, fit_overhead(&train)?)?;
    let mut out = Scatter {
        lut: Vec::with_capacity(test.len()),
        truth: Vec::with_capacity(test.len()),
        accuracy: 0.0,
    };
    for (&a, &t) in &test {
        out.lut.push(lut_predict(&lut, &architecture_from_index(a)?, &m));
        out.truth.push(t);
    }
    let pairs: Vec<(f64, f64)> = out.lut.iter().copied().zip(out.truth.iter().copied()).collect();
    out.accuracy = bound_accuracy(&pairs, 0.10)?;
    Ok(out)
}

#[wasm_bindgen(js_name = lutScatter)]
pub fn lut_scatter(seed: u64, index: usize, fusion_discount: f64, skip_elision: bool) -> Result<Scatter, JsError> {
    scatter(seed, index, fusion_discount, skip_elision).map_err(js)
}

#[wasm_bindgen]
pub struct Spread {
    sorted: Vec<f64>,
    targeted: Vec<u32>,
    random: Vec<u32>,
}

#[wasm_bindgen]
impl Spread {
    /// Training-range latencies in ascending order.
    #[wasm_bindgen(getter)]
    pub fn sorted(&self) -> Vec<f64> {
        self.sorted.clone()
    }

    /// Ranks picked by targeted uniform sampling.
    #[wasm_bindgen(getter)]
    pub fn targeted(&self) -> Vec<u32> {
        self.targeted.clone()
    }

    /// Ranks picked by uniform random sampling.
    #[wasm_bindgen(getter)]
    pub fn random(&self) -> Vec<u32> {
        self.random.clone()
    }
}

/// Ranks of `n` adaptation picks by both strategies on one device's
/// training-range latencies.
pub fn spread(seed: u64, index: usize, n: usize) -> edgelat::Result<Spread> {
    let dev = device(seed, index)?;
    let m = MacroConfig::default();
    let mut rows: Vec<(usize, f64)> = BenchmarkOrder::canonical_range(PositionRange::new(0, 899)?)?
        .into_iter()
        .map(|a| Ok((a, measure_e2e(&dev, &architecture_from_index(a)?, &m).latency_s)))
        .collect::<edgelat::Result<_>>()?;
    let table = BTreeMap::from([(dev.device_id().to_string(), rows.clone())]);
    let archs: Vec<usize> = rows.iter().map(|r| r.0).collect();
    let targeted = targeted_uniform_sample(&table, n, seed)?;
    let random = random_sample(&archs, n, seed)?;
    rows.sort_by(|a, b| a.1.total_cmp(&b.1));
    let rank_of = |picks: &[usize]| -> Vec<u32> {
        let mut r: Vec<u32> = picks
            .iter()
            .map(|p| rows.iter().position(|row| row.0 == *p).expect("pick from table") as u32)
            .collect();
        r.sort_unstable();
        r
    };
    Ok(Spread {
        targeted: rank_of(&targeted),
        random: rank_of(&random),
        sorted: rows.into_iter().map(|r| r.1).collect(),
    })
}

#[wasm_bindgen(js_name = samplerSpread)]
pub fn sampler_spread(seed: u64, index: usize, n: usize) -> Result<Spread, JsError> {
    spread(seed, index, n).map_err(js)
}

#[wasm_bindgen]
pub struct CellReport {
    index: usize,
    measured: f64,
    noiseless: f64,
    lut: f64,
    contributions: Vec<f64>,
}

#[wasm_bindgen]
impl CellReport {
    #[wasm_bindgen(getter)]
    pub fn index(&self) -> usize {
        self.index
    }

    #[wasm_bindgen(getter)]
    pub fn measured(&self) -> f64 {
        self.measured
    }

    #[wasm_bindgen(getter)]
    pub fn noiseless(&self) -> f64 {
        self.noiseless
    }

    #[wasm_bindgen(getter)]
    pub fn lut(&self) -> f64 {
        self.lut
    }

    /// LUT seconds per operator kind, in `none, skip, conv1x1, conv3x3, avgpool` order.
    #[wasm_bindgen(getter)]
    pub fn contributions(&self) -> Vec<f64> {
        self.contributions.clone()
    }
}

/// Latency of one cell given its six edge operators (0 = none ... 4 = avgpool).
pub fn cell(seed: u64, index: usize, edges: &[u8]) -> edgelat::Result<CellReport> {
    if edges.len() != NUM_EDGES {
        return Err(edgelat::Error::Range(format!(
            "expected {NUM_EDGES} edges, got {}",
            edges.len()
        )));
    }
    let mut ops = [OperatorKind::None; NUM_EDGES];
    for (slot, &e) in ops.iter_mut().zip(edges) {
        *slot = OperatorKind::from_order(e as usize)
            .ok_or_else(|| edgelat::Error::Range(format!("operator code {e} outside 0..5")))?;
    }
    let arch = CellArchitecture::from_edges(ops);
    let dev = device(seed, index)?;
    let m = MacroConfig::default();
    let lut = lut_build(dev.device_id(), &profile_all(&dev, 1000)?, dev.overhead_s())?;
    let counts = operator_multiset(&arch, &m);
    let mut contributions = vec![0.0; 5];
    for v in OperatorVariant::all() {
        contributions[v.kind().order()] += f64::from(counts[v.index()]) * lut.per_variant_latency_s()[v.index()];
    }
    Ok(CellReport {
        index: arch.index(),
        measured: measure_e2e(&dev, &arch, &m).latency_s,
        noiseless: dev.noiseless_e2e(&arch, &m),
        lut: lut_predict(&lut, &arch, &m),
        contributions,
    })
}

#[wasm_bindgen(js_name = cellLatency)]
pub fn cell_latency(seed: u64, index: usize, edges: Vec<u8>) -> Result<CellReport, JsError> {
    cell(seed, index, &edges).map_err(js)
}
