//! Variable and row naming scheme of the emitted LP.

pub fn gen_dispatch(id: &str, t: usize) -> String {
    format!("g[{id}][{t}]")
}

pub fn gen_capacity(id: &str) -> String {
    format!("G[{id}]")
}

pub fn storage_discharge(id: &str, t: usize) -> String {
    format!("hp[{id}][{t}]")
}

pub fn storage_charge(id: &str, t: usize) -> String {
    format!("hm[{id}][{t}]")
}

pub fn storage_power(id: &str) -> String {
    format!("H[{id}]")
}

pub fn soc(id: &str, tau: usize) -> String {
    format!("e[{id}][{tau}]")
}

pub fn angle(id: &str, t: usize) -> String {
    format!("theta[{id}][{t}]")
}

pub fn flow(id: &str, t: usize) -> String {
    format!("f[{id}][{t}]")
}

pub fn balance(bus: &str, t: usize) -> String {
    format!("balance[{bus}][{t}]")
}

pub fn kirchhoff(line: &str, t: usize) -> String {
    format!("kirchhoff[{line}][{t}]")
}

pub fn gen_upper(id: &str, t: usize) -> String {
    format!("gmax[{id}][{t}]")
}

pub fn gen_lower(id: &str, t: usize) -> String {
    format!("gmin[{id}][{t}]")
}

pub fn discharge_limit(id: &str, t: usize) -> String {
    format!("hpmax[{id}][{t}]")
}

pub fn charge_limit(id: &str, t: usize) -> String {
    format!("hmmax[{id}][{t}]")
}

pub fn soc_limit(id: &str, tau: usize) -> String {
    format!("emax[{id}][{tau}]")
}

pub fn soc_balance(id: &str, tau: usize) -> String {
    format!("soc[{id}][{tau}]")
}
