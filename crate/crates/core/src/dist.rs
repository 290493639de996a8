//! Normal, Student t and bivariate normal distribution functions.

use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc_inv;
use statrs::function::gamma::ln_gamma;

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal quantile. Returns ±∞ at the endpoints.
pub fn normal_quantile(p: f64) -> f64 {
    assert!((0.0..=1.0).contains(&p), "probability {p} outside [0, 1]");
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    // Newton steps on the accurate erfc polish the initial inverse
    let mut x = -SQRT_2 * erfc_inv(2.0 * p);
    for _ in 0..2 {
        let f = if x < 0.0 {
            normal_cdf(x) - p
        } else {
            (1.0 - p) - 0.5 * libm::erfc(x * FRAC_1_SQRT_2)
        };
        let step = f / normal_pdf(x);
        if !step.is_finite() {
            break;
        }
        x -= step;
    }
    x
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Student t distribution function with `df` degrees of freedom (df > 0,
/// non-integer allowed).
pub fn t_cdf(x: f64, df: f64) -> f64 {
    assert!(df > 0.0, "t distribution needs df > 0");
    if x.is_infinite() {
        return if x > 0.0 { 1.0 } else { 0.0 };
    }
    let tail = t_two_sided_tail(x.abs(), df) * 0.5;
    if x > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// P(|T| > x) for x >= 0. Integer df use the exact trigonometric series,
/// other df the regularized incomplete beta function.
fn t_two_sided_tail(x: f64, df: f64) -> f64 {
    if df.fract() != 0.0 || df > 1000.0 {
        return beta_reg(0.5 * df, 0.5, df / (df + x * x));
    }
    let nu = df as u32;
    let theta = (x / df.sqrt()).atan();
    let (s, c) = theta.sin_cos();
    let c2 = c * c;
    let inside = if nu % 2 == 1 {
        let mut sum = 0.0;
        if nu > 1 {
            let mut term = 1.0;
            sum = 1.0;
            let mut j = 2;
            while j + 1 < nu {
                term *= j as f64 / (j + 1) as f64 * c2;
                sum += term;
                j += 2;
            }
        }
        2.0 / PI * (theta + s * c * sum)
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut j = 1;
        while j + 1 < nu {
            term *= j as f64 / (j + 1) as f64 * c2;
            sum += term;
            j += 2;
        }
        s * sum
    };
    (1.0 - inside).clamp(0.0, 1.0)
}

fn t_pdf(x: f64, df: f64) -> f64 {
    let ln_norm = ln_gamma(0.5 * (df + 1.0)) - ln_gamma(0.5 * df) - 0.5 * (df * PI).ln();
    (ln_norm - 0.5 * (df + 1.0) * (1.0 + x * x / df).ln()).exp()
}

/// Student t quantile. The statrs inverse serves as a starting point and is
/// refined by Newton steps on [`t_cdf`].
pub fn t_quantile(p: f64, df: f64) -> f64 {
    assert!((0.0..=1.0).contains(&p), "probability {p} outside [0, 1]");
    assert!(df > 0.0, "t distribution needs df > 0");
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    if p == 0.5 {
        return 0.0;
    }
    // symmetric: solve in the upper half for accuracy
    let (q, sign) = if p < 0.5 { (1.0 - p, -1.0) } else { (p, 1.0) };
    let mut x = StudentsT::new(0.0, 1.0, df)
        .map(|d| d.inverse_cdf(q))
        .unwrap_or_else(|_| normal_quantile(q));
    if !x.is_finite() || x <= 0.0 {
        x = normal_quantile(q).max(1e-3);
    }
    for _ in 0..50 {
        // work with the upper tail to avoid cancellation near 1
        let upper = 0.5 * t_two_sided_tail(x, df);
        let step = (upper - (1.0 - q)) / t_pdf(x, df);
        x += step;
        if step.abs() <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    sign * x
}

/// Lower orthant probability P(Z1 <= h, Z2 <= k) for a standard bivariate
/// normal with correlation `r`.
pub fn bivariate_normal_cdf(h: f64, k: f64, r: f64) -> f64 {
    assert!(r.abs() <= 1.0, "correlation {r} outside [-1, 1]");
    upper_orthant(-h, -k, r)
}

// Gauss-Legendre half-rules (nodes in (0,1) mirrored by the caller) for 6, 12
// and 20 points.
const GL6: ([f64; 3], [f64; 3]) = (
    [0.1713244923791705, 0.3607615730481384, 0.4679139345726904],
    [0.9324695142031522, 0.6612093864662647, 0.2386191860831970],
);
const GL12: ([f64; 6], [f64; 6]) = (
    [
        0.04717533638651177,
        0.1069393259953183,
        0.1600783285433464,
        0.2031674267230659,
        0.2334925365383547,
        0.2491470458134029,
    ],
    [
        0.9815606342467191,
        0.9041172563704750,
        0.7699026741943050,
        0.5873179542866171,
        0.3678314989981802,
        0.1252334085114692,
    ],
);
const GL20: ([f64; 10], [f64; 10]) = (
    [
        0.01761400713915212,
        0.04060142980038694,
        0.06267204833410906,
        0.08327674157670475,
        0.1019301198172404,
        0.1181945319615184,
        0.1316886384491766,
        0.1420961093183821,
        0.1491729864726037,
        0.1527533871307259,
    ],
    [
        0.9931285991850949,
        0.9639719272779138,
        0.9122344282513259,
        0.8391169718222188,
        0.7463319064601508,
        0.6360536807265150,
        0.5108670019508271,
        0.3737060887154196,
        0.2277858511416451,
        0.07652652113349733,
    ],
);

/// P(Z1 > dh, Z2 > dk) by the Drezner-Wesolowsky / Genz scheme.
fn upper_orthant(dh: f64, dk: f64, r: f64) -> f64 {
    if dh == f64::INFINITY || dk == f64::INFINITY {
        return 0.0;
    }
    if dh == f64::NEG_INFINITY {
        return if dk == f64::NEG_INFINITY {
            1.0
        } else {
            normal_cdf(-dk)
        };
    }
    if dk == f64::NEG_INFINITY {
        return normal_cdf(-dh);
    }
    if r == 0.0 {
        return normal_cdf(-dh) * normal_cdf(-dk);
    }

    let (weights, nodes): (&[f64], &[f64]) = if r.abs() < 0.3 {
        (&GL6.0, &GL6.1)
    } else if r.abs() < 0.75 {
        (&GL12.0, &GL12.1)
    } else {
        (&GL20.0, &GL20.1)
    };
    // mirrored nodes on (0, 2)
    let points = || {
        weights
            .iter()
            .zip(nodes)
            .flat_map(|(&w, &x)| [(w, 1.0 - x), (w, 1.0 + x)])
    };

    let tp = 2.0 * PI;
    let h = dh;
    let mut k = dk;
    let mut hk = h * k;

    let bvn = if r.abs() < 0.925 {
        let hs = 0.5 * (h * h + k * k);
        let asr = 0.5 * r.asin();
        let sum: f64 = points()
            .map(|(w, x)| {
                let sn = (asr * x).sin();
                w * ((sn * hk - hs) / (1.0 - sn * sn)).exp()
            })
            .sum();
        sum * asr / tp + normal_cdf(-h) * normal_cdf(-k)
    } else {
        if r < 0.0 {
            k = -k;
            hk = -hk;
        }
        let mut bvn = 0.0;
        if r.abs() < 1.0 {
            let as_ = (1.0 - r) * (1.0 + r);
            let mut a = as_.sqrt();
            let bs = (h - k) * (h - k);
            let c = (4.0 - hk) / 8.0;
            let d = (12.0 - hk) / 80.0;
            let asr = -0.5 * (bs / as_ + hk);
            if asr > -100.0 {
                bvn = a
                    * asr.exp()
                    * (1.0 - c * (bs - as_) * (1.0 - d * bs) / 3.0 + c * d * as_ * as_);
            }
            if hk > -100.0 {
                let b = bs.sqrt();
                let sp = tp.sqrt() * normal_cdf(-b / a);
                bvn -= (-0.5 * hk).exp() * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
            }
            a *= 0.5;
            let sum: f64 = points()
                .filter_map(|(w, x)| {
                    let xs = (a * x) * (a * x);
                    let asr = -0.5 * (bs / xs + hk);
                    if asr <= -100.0 {
                        return None;
                    }
                    let sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
                    let rs = (1.0 - xs).sqrt();
                    let ep = (-(hk / 2.0) * xs / ((1.0 + rs) * (1.0 + rs))).exp() / rs;
                    Some(w * asr.exp() * (sp - ep))
                })
                .sum();
            bvn = (a * sum - bvn) / tp;
        }
        if r > 0.0 {
            bvn + normal_cdf(-h.max(k))
        } else if h >= k {
            -bvn
        } else {
            let l = if h < 0.0 {
                normal_cdf(k) - normal_cdf(h)
            } else {
                normal_cdf(-h) - normal_cdf(-k)
            };
            l - bvn
        }
    };
    bvn.clamp(0.0, 1.0)
}
