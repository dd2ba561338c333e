//! Quadrature rules: Gauss–Hermite for γ₁ and the 7/15-point Gauss–Kronrod pair.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

/// Tensorized Gauss–Hermite rule for γₙ, stored per axis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub dim: usize,
    pub nodes_per_axis: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn new(dim: usize, m: usize) -> Self {
        let rule = gauss_hermite(m);
        QuadratureGrid { dim, nodes_per_axis: m, nodes: rule.0.clone(), weights: rule.1.clone() }
    }

    pub fn num_points(&self) -> usize {
        self.nodes_per_axis.saturating_pow(self.dim as u32)
    }

    /// Calls `f(x, w)` for every tensor node `x` with product weight `w`.
    pub fn for_each(&self, mut f: impl FnMut(&[f64], f64)) {
        let m = self.nodes_per_axis;
        if self.dim == 0 {
            f(&[], 1.0);
            return;
        }
        let mut idx = vec![0usize; self.dim];
        let mut x = vec![self.nodes[0]; self.dim];
        loop {
            let w = idx.iter().map(|&i| self.weights[i]).product();
            f(&x, w);
            let mut axis = self.dim;
            loop {
                if axis == 0 {
                    return;
                }
                axis -= 1;
                idx[axis] += 1;
                if idx[axis] < m {
                    x[axis] = self.nodes[idx[axis]];
                    break;
                }
                idx[axis] = 0;
                x[axis] = self.nodes[0];
            }
        }
    }

    /// Σ w·f(x) over the grid.
    pub fn integrate(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        let mut acc = 0.0;
        self.for_each(|x, w| acc += w * f(x));
        acc
    }
}

type Rule = Arc<(Vec<f64>, Vec<f64>)>;

/// Nodes and weights of the m-point Gauss–Hermite rule for γ₁ (weights sum to 1).
///
/// Roots of the physicists' H_m by Newton iteration on the orthonormal
/// recurrence, rescaled by √2.
pub fn gauss_hermite(m: usize) -> Rule {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().expect("rule cache").get(&m) {
        return r.clone();
    }
    let rule = Arc::new(compute_gauss_hermite(m));
    cache.lock().expect("rule cache").insert(m, rule.clone());
    rule
}

fn compute_gauss_hermite(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1, "Gauss–Hermite rule needs at least one node");
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let nf = m as f64;
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    let mut z = 0.0f64;
    for i in 0..m.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..m {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[m - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[m - 1 - i] = w[i];
    }
    let sum: f64 = w.iter().sum();
    let mut nodes: Vec<f64> = x.iter().map(|v| v * std::f64::consts::SQRT_2).collect();
    let mut weights: Vec<f64> = w.iter().map(|v| v / sum).collect();
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

/// A Gauss–Kronrod pair on [−1, 1], stored by its non-negative half.
///
/// `xgk` runs outermost first and ends at 0; the Gauss nodes are the entries
/// at odd positions, plus the centre when the Gauss order is odd.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Kronrod {
    pub xgk: &'static [f64],
    pub wgk: &'static [f64],
    pub wg: &'static [f64],
}

impl Kronrod {
    /// Weight of the centre node in the Gauss rule (0 when it is not a Gauss node).
    pub fn gauss_centre_weight(&self) -> f64 {
        if self.wg.len() * 2 > self.xgk.len() - 1 {
            self.wg[self.wg.len() - 1]
        } else {
            0.0
        }
    }
}

pub(crate) const GK15: Kronrod = Kronrod { xgk: &XGK15, wgk: &WGK15, wg: &WG15 };
pub(crate) const GK31: Kronrod = Kronrod { xgk: &XGK31, wgk: &WGK31, wg: &WG31 };
pub(crate) const GK61: Kronrod = Kronrod { xgk: &XGK61, wgk: &WGK61, wg: &WG61 };

const XGK15: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];

const WGK15: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG15: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const XGK31: [f64; 16] = [
    0.998002298693397060285172840152271209,
    0.987992518020485428489565718586612581,
    0.967739075679139134257347978784337225,
    0.937273392400705904307758947710209471,
    0.897264532344081900882509656454495883,
    0.848206583410427216200648320774216851,
    0.790418501442465932967649294817947347,
    0.72441773136017004741618605461393801,
    0.650996741297416970533735895313274693,
    0.570972172608538847537226737253910641,
    0.485081863640239680693655740232350613,
    0.394151347077563369897207370981045468,
    0.299180007153168812166780024266388963,
    0.201194093997434522300628303394596208,
    0.101142066918717499027074231447392339,
    0.0,
];

const WGK31: [f64; 16] = [
    0.00537747987292334898779205143012764982,
    0.0150079473293161225383747630758072681,
    0.0254608473267153201868740010196533594,
    0.0353463607913758462220379484783600481,
    0.0445897513247648766082272993732796902,
    0.0534815246909280872653431472394302968,
    0.0620095678006706402851392309608029322,
    0.0698541213187282587095200770991474758,
    0.0768496807577203788944327774826590067,
    0.0830805028231330210382892472861037896,
    0.0885644430562117706472754436937743032,
    0.0931265981708253212254868727473457186,
    0.0966427269836236785051799076275893351,
    0.0991735987217919593323931734846031311,
    0.100769845523875595044946662617569722,
    0.101330007014791549017374792767492547,
];

const WG31: [f64; 8] = [
    0.0307532419961172683546283935772044177,
    0.0703660474881081247092674164506673385,
    0.107159220467171935011869546685869303,
    0.139570677926154314447804794511028323,
    0.166269205816993933553200860481208811,
    0.186161000015562211026800561866422825,
    0.198431485327111576456118326443839325,
    0.202578241925561272880620199967519315,
];

const XGK61: [f64; 31] = [
    0.999484410050490637571325895682053685,
    0.996893484074649540271630050918695283,
    0.991630996870404594858628366131723637,
    0.983668123279747209970032581605662802,
    0.973116322501126268374693868419568026,
    0.960021864968307512216871025581797663,
    0.94437444474855997941583132402942706,
    0.926200047429274325879324277080474004,
    0.905573307699907798546522558936311544,
    0.88256053579205268154311646253022559,
    0.857205233546061098958658510650384439,
    0.829565762382768397442898119732501916,
    0.799727835821839083013668942329181503,
    0.767777432104826194917977340974503132,
    0.733790062453226804726171131364582859,
    0.697850494793315796932292388026640068,
    0.660061064126626961370053668153077272,
    0.620526182989242861140477556431189299,
    0.579345235826361691756024932169597257,
    0.536624148142019899264169793311072794,
    0.492480467861778574993693061209968613,
    0.447033769538089176780609900322854,
    0.400401254830394392535476211540964251,
    0.352704725530878113471037207089373861,
    0.304073202273625077372677107200469685,
    0.254636926167889846439805129817805108,
    0.204525116682309891438957671001242226,
    0.15386991360858354696379467274325592,
    0.102806937966737030147096751318384293,
    0.0514718425553176958330252131667225737,
    0.0,
];

const WGK61: [f64; 31] = [
    0.00138901369867700762455159125560603703,
    0.00389046112709988405126720179091039045,
    0.00663070391593129217331982638382623247,
    0.00927327965951776342844114690852551436,
    0.0118230152534963417422328988481593425,
    0.0143697295070458048124514324458835126,
    0.0169208891890532726275722894260928246,
    0.0194141411939423811734089510320965267,
    0.0218280358216091922971674857406400692,
    0.0241911620780806013656863707386038748,
    0.0265099548823331016106017093355709807,
    0.0287540487650412928439787853411078136,
    0.0309072575623877624728842529453860183,
    0.0329814470574837260318141910244412467,
    0.034979338028060024137499670732038487,
    0.0368823646518212292239110656091607958,
    0.0386789456247275929503486515338864868,
    0.0403745389515359591119952797566574409,
    0.0419698102151642461471475412866181564,
    0.0434525397013560693168317281120209601,
    0.044814800133162663192355551617995463,
    0.0460592382710069881162717355615229219,
    0.0471855465692991539452614781817571442,
    0.0481858617570871291407794922951343658,
    0.0490554345550297788875281653683467548,
    0.0497956834270742063578115693806324918,
    0.0504059214027823468408930856542378669,
    0.0508817958987496064922974730480425672,
    0.0512215478492587721706562826059836554,
    0.0514261285374590259338628792152393696,
    0.0514947294294515675583404336477493771,
];

const WG61: [f64; 15] = [
    0.00796819249616660561546588347467362245,
    0.0184664683110909591423021319120472691,
    0.0287847078833233693497191796112920436,
    0.038799192569627049596801936446347692,
    0.0484026728305940529029381404228075178,
    0.0574931562176190664817216894020561288,
    0.0659742298821804951281285151159623612,
    0.0737559747377052062682438500221907342,
    0.0807558952294202153546949384605297309,
    0.0868997872010829798023875307151257026,
    0.0921225222377861287176327070876187672,
    0.0963687371746442596394686263518098651,
    0.0995934205867952670627802821035694765,
    0.101762389748405504596428952168554045,
    0.102852652893558840341285636705415044,
];
