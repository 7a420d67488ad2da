//! Text grammars for systems, states and numeric lists.

use num_complex::Complex64;
use phasekit::linalg::zeros;
use phasekit::{MatrixJson, OperatorMatrix, StateSpec, SystemDescriptor};

/// Malformed input, with the byte offset where the problem starts.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{message} at position {position} in '{input}'")]
pub struct ParseError {
    pub input: String,
    pub position: usize,
    pub message: String,
}

fn err(input: &str, position: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        input: input.to_string(),
        position,
        message: message.into(),
    }
}

/// Split `text` on `sep`, yielding each piece with its byte offset.
fn pieces(text: &str, sep: char) -> impl Iterator<Item = (usize, &str)> {
    let mut start = 0;
    text.split(sep).map(move |p| {
        let at = start;
        start += p.len() + sep.len_utf8();
        (at, p)
    })
}

fn number<T: std::str::FromStr>(
    full: &str,
    at: usize,
    tok: &str,
    what: &str,
) -> Result<T, ParseError> {
    tok.trim()
        .parse()
        .map_err(|_| err(full, at, format!("expected {what}, found '{tok}'")))
}

/// `hw:<n_max>` | `su:<N>:<M>`, factors joined by `*`.
pub fn parse_system(text: &str) -> Result<SystemDescriptor, ParseError> {
    if text.trim().is_empty() {
        return Err(err(text, 0, "empty system descriptor"));
    }
    let mut factors = Vec::new();
    for (at, f) in pieces(text, '*') {
        let parts: Vec<(usize, &str)> = pieces(f, ':').map(|(o, p)| (at + o, p)).collect();
        let desc = match parts.as_slice() {
            [(_, "hw"), (o, n)] => SystemDescriptor::hw(number(text, *o, n, "an integer n_max")?),
            [(_, "su"), (o1, n), (o2, m)] => SystemDescriptor::sun(
                number(text, *o1, n, "an integer N")?,
                number(text, *o2, m, "an integer M")?,
            ),
            [(o, "hw"), ..] => return Err(err(text, *o, "expected hw:<n_max>")),
            [(o, "su"), ..] => return Err(err(text, *o, "expected su:<N>:<M>")),
            [(o, kind), ..] => {
                return Err(err(
                    text,
                    *o,
                    format!("unknown factor kind '{kind}'; expected hw or su"),
                ))
            }
            [] => unreachable!(),
        };
        factors.push(desc.map_err(|e| err(text, at, e.to_string()))?);
    }
    if factors.len() == 1 {
        return Ok(factors.pop().unwrap());
    }
    SystemDescriptor::composite(factors).map_err(|e| err(text, 0, e.to_string()))
}

/// Comma-separated reals.
pub fn parse_reals(text: &str) -> Result<Vec<f64>, ParseError> {
    pieces(text, ',')
        .map(|(at, t)| number(text, at, t, "a number"))
        .collect()
}

/// `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i`.
pub fn parse_complex(text: &str) -> Result<Complex64, ParseError> {
    let t = text.trim();
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex64::new(number(text, 0, t, "a complex number")?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        s => s,
    };
    Ok(Complex64::new(
        number(text, 0, re, "a real part")?,
        number(text, split.unwrap_or(0), im, "an imaginary part")?,
    ))
}

/// Comma-separated complex numbers.
pub fn parse_complexes(text: &str) -> Result<Vec<Complex64>, ParseError> {
    pieces(text, ',')
        .map(|(at, t)| parse_complex(t).map_err(|e| err(text, at + e.position, e.message)))
        .collect()
}

fn pairs(full: &str, at: usize, body: &str) -> Result<Vec<(f64, f64)>, ParseError> {
    pieces(body, ';')
        .map(|(o, p)| {
            let v = parse_reals(p).map_err(|e| err(full, at + o + e.position, e.message))?;
            match v.as_slice() {
                [a, b] => Ok((*a, *b)),
                _ => Err(err(
                    full,
                    at + o,
                    format!("expected two numbers, found {}", v.len()),
                )),
            }
        })
        .collect()
}

fn spin_m(full: &str, desc: &SystemDescriptor) -> Result<usize, ParseError> {
    match *desc {
        SystemDescriptor::Sun { n: 2, m } => Ok(m),
        _ => Err(err(
            full,
            0,
            format!("spin states need an su:2:M system, got {desc}"),
        )),
    }
}

fn ghz_qubits(full: &str, desc: &SystemDescriptor) -> Result<usize, ParseError> {
    match desc {
        SystemDescriptor::Sun { n: 2, m } => Ok(*m),
        SystemDescriptor::Composite(fs) => Ok(fs.len()),
        _ => Err(err(full, 0, format!("GHZ states need qubits, got {desc}"))),
    }
}

/// State grammar:
/// `fock:n`, `basis:k`, `coherent:re,im`, `hwcat:re,im;re,im;...`, `cat3`,
/// `spin:phi,theta`, `spincat:phi,theta;...`, `spincat3`, `ghz`,
/// `random:seed`, `thermal:beta` (needs `hamiltonian`), `mixed`.
pub fn parse_state(
    text: &str,
    desc: &SystemDescriptor,
    hamiltonian: Option<&OperatorMatrix>,
) -> Result<StateSpec, ParseError> {
    let (name, body, at) = match text.find(':') {
        Some(k) => (&text[..k], Some(&text[k + 1..]), k + 1),
        None => (text, None, text.len()),
    };
    let need = |what: &str| body.ok_or_else(|| err(text, at, format!("'{name}' needs {what}")));
    let dim = desc.dimension().map_err(|e| err(text, 0, e.to_string()))?;
    Ok(match name {
        "fock" => StateSpec::Fock {
            n: number(text, at, need("a number")?, "an integer")?,
        },
        "basis" => StateSpec::Basis {
            index: number(text, at, need("an index")?, "an integer")?,
        },
        "coherent" => {
            let v =
                parse_reals(need("re,im")?).map_err(|e| err(text, at + e.position, e.message))?;
            match v.as_slice() {
                [re, im] => StateSpec::Coherent {
                    alpha: Complex64::new(*re, *im),
                },
                _ => return Err(err(text, at, "expected coherent:re,im")),
            }
        }
        "hwcat" => {
            let ps = pairs(text, at, need("components")?)?;
            StateSpec::HwCat {
                weights: vec![Complex64::new(1.0, 0.0); ps.len()],
                components: ps.into_iter().map(|(a, b)| Complex64::new(a, b)).collect(),
            }
        }
        "cat3" => StateSpec::three_component_cat(),
        "spin" => {
            let ps = pairs(text, at, need("phi,theta")?)?;
            match ps.as_slice() {
                [(phi, theta)] => StateSpec::SpinCoherent {
                    m: spin_m(text, desc)?,
                    phi: *phi,
                    theta: *theta,
                },
                _ => return Err(err(text, at, "expected spin:phi,theta")),
            }
        }
        "spincat" => StateSpec::SpinCat {
            m: spin_m(text, desc)?,
            points: pairs(text, at, need("components")?)?,
        },
        "spincat3" => StateSpec::three_component_spin_cat(spin_m(text, desc)?),
        "ghz" => StateSpec::Ghz {
            n_qubits: ghz_qubits(text, desc)?,
        },
        "random" => StateSpec::RandomDensity {
            dim,
            seed: number(text, at, need("a seed")?, "an integer seed")?,
        },
        "thermal" => {
            let beta = number(text, at, need("beta")?, "a number")?;
            let h = hamiltonian
                .ok_or_else(|| err(text, 0, "thermal states need --field or --hamiltonian"))?;
            StateSpec::Thermal {
                hamiltonian: MatrixJson::from(h),
                beta,
            }
        }
        "mixed" => StateSpec::Thermal {
            hamiltonian: MatrixJson::from(&zeros(dim)),
            beta: 0.0,
        },
        other => return Err(err(text, 0, format!("unknown state '{other}'"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn systems() {
        assert_eq!(parse_system("su:2:1").unwrap(), SystemDescriptor::qubit());
        assert_eq!(
            parse_system("hw:30").unwrap(),
            SystemDescriptor::hw(30).unwrap()
        );
        let five = parse_system("su:2:1*su:2:1*su:2:1*su:2:1*su:2:1").unwrap();
        assert_eq!(five.dimension().unwrap(), 32);
        assert_eq!(five.factors().len(), 5);
        let mixed = parse_system("hw:4*su:3:1").unwrap();
        assert_eq!(mixed.to_string(), "hw:4*su:3:1");
    }

    #[test]
    fn system_errors_carry_positions() {
        let e = parse_system("su:2:1*su:x:1").unwrap_err();
        assert_eq!(e.position, 10);
        let e = parse_system("su:2:1*qq:3").unwrap_err();
        assert_eq!(e.position, 7);
        assert!(e.message.contains("unknown factor"));
        let e = parse_system("su:2:0").unwrap_err();
        assert_eq!(e.position, 0);
        assert!(parse_system("hw:3:1").is_err());
        assert!(parse_system("").is_err());
        assert!(e.to_string().contains("position 0"));
    }

    #[test]
    fn complex_numbers() {
        let c = |re, im| Complex64::new(re, im);
        assert_eq!(parse_complex("1").unwrap(), c(1.0, 0.0));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("2.5i").unwrap(), c(0.0, 2.5));
        assert_eq!(parse_complex("1-2i").unwrap(), c(1.0, -2.0));
        assert_eq!(parse_complex("1e-3+1e+2i").unwrap(), c(1e-3, 1e2));
        assert_eq!(
            parse_complexes("1,1,-i").unwrap(),
            vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, -1.0)]
        );
        assert_eq!(parse_complexes("1,x").unwrap_err().position, 2);
    }

    #[test]
    fn states() {
        let q = SystemDescriptor::qubit();
        let h = SystemDescriptor::hw(10).unwrap();
        assert_eq!(
            parse_state("fock:3", &h, None).unwrap(),
            StateSpec::Fock { n: 3 }
        );
        assert_eq!(
            parse_state("coherent:0.5,-1", &h, None).unwrap(),
            StateSpec::Coherent {
                alpha: Complex64::new(0.5, -1.0)
            }
        );
        let StateSpec::HwCat { components, .. } = parse_state("hwcat:1,0;-1,0", &h, None).unwrap()
        else {
            panic!()
        };
        assert_eq!(components.len(), 2);
        assert_eq!(
            parse_state("spin:0.1,0.2", &q, None).unwrap(),
            StateSpec::SpinCoherent {
                m: 1,
                phi: 0.1,
                theta: 0.2
            }
        );
        assert!(matches!(
            parse_state("spincat3", &SystemDescriptor::sun(2, 5).unwrap(), None).unwrap(),
            StateSpec::SpinCat { m: 5, .. }
        ));
        assert_eq!(
            parse_state("ghz", &parse_system("su:2:1*su:2:1").unwrap(), None).unwrap(),
            StateSpec::Ghz { n_qubits: 2 }
        );
        assert_eq!(
            parse_state("random:7", &q, None).unwrap(),
            StateSpec::RandomDensity { dim: 2, seed: 7 }
        );
        assert!(parse_state("thermal:1", &q, None).is_err());
        let e = parse_state("coherent:1,zz", &h, None).unwrap_err();
        assert_eq!(e.position, 11);
        assert!(parse_state("spin:0,0", &h, None).is_err());
        assert!(parse_state("bogus", &q, None).is_err());
    }
}
