//! Grammar-directed generator of small well-typed higher-order programs.
//!
//! Every program ends with `main (a : int) (b : int) (l : int list) : int`,
//! which calls each earlier global with freshly built arguments, so every
//! arrow type that is applied somewhere also has a lambda or eta site.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum T {
    Int,
    List,
    /// `int -> int`
    F1,
    /// `int -> int -> int`
    F2,
}

impl T {
    fn text(self) -> &'static str {
        match self {
            T::Int => "int",
            T::List => "int list",
            T::F1 => "int -> int",
            T::F2 => "int -> int -> int",
        }
    }
}

struct Global {
    name: String,
    params: Vec<T>,
}

struct Gen {
    rng: ChaCha8Rng,
    globals: Vec<Global>,
    fresh: usize,
}

type Env = Vec<(String, T)>;

const DEPTH: u32 = 3;

impl Gen {
    fn fresh(&mut self, base: &str) -> String {
        self.fresh += 1;
        format!("{base}{}", self.fresh)
    }

    fn pick(&mut self, env: &Env, t: T) -> Option<String> {
        let names: Vec<&String> = env.iter().filter(|(_, u)| *u == t).map(|(n, _)| n).collect();
        names.choose(&mut self.rng).map(|n| n.to_string())
    }

    fn int(&mut self, env: &Env, depth: u32) -> String {
        let leaf = depth == 0 || self.rng.gen_bool(0.25);
        if leaf {
            if let Some(v) = self.pick(env, T::Int).filter(|_| self.rng.gen_bool(0.7)) {
                return v;
            }
            let n: i64 = self.rng.gen_range(-9..=9);
            return if n < 0 { format!("({n})") } else { n.to_string() };
        }
        let d = depth - 1;
        match self.rng.gen_range(0..9) {
            0 | 1 => {
                let op = *["+", "-", "*"].choose(&mut self.rng).unwrap();
                format!("({} {op} {})", self.int(env, d), self.int(env, d))
            }
            2 => {
                let cmp = *["<", "<=", "=", "<>"].choose(&mut self.rng).unwrap();
                format!(
                    "(if {} {cmp} {} then {} else {})",
                    self.int(env, d),
                    self.int(env, d),
                    self.int(env, d),
                    self.int(env, d)
                )
            }
            3 => match self.pick(env, T::F1) {
                Some(f) => format!("({f} {})", self.int(env, d)),
                None => format!("({} {})", self.f1(env, d), self.int(env, d)),
            },
            4 => match self.pick(env, T::F2) {
                Some(f) => format!("({f} {} {})", self.int(env, d), self.int(env, d)),
                None => self.int(env, d),
            },
            5 => {
                let x = self.fresh("v");
                let bound = self.int(env, d);
                let mut inner = env.clone();
                inner.push((x.clone(), T::Int));
                format!("(let {x} : int = {bound} in {})", self.int(&inner, d))
            }
            6 => match self.pick(env, T::List) {
                Some(l) => {
                    let nil = self.int(env, d);
                    let (x, t) = (self.fresh("x"), self.fresh("t"));
                    let mut inner = env.clone();
                    inner.push((x.clone(), T::Int));
                    inner.push((t.clone(), T::List));
                    format!("(match {l} with | [] -> {nil} | {x} :: {t} -> {})", self.int(&inner, d))
                }
                None => self.int(env, d),
            },
            7 => {
                let f = self.fresh("h");
                let y = self.fresh("y");
                let mut body_env = env.clone();
                body_env.push((y.clone(), T::Int));
                let body = self.int(&body_env, d);
                let mut inner = env.clone();
                inner.push((f.clone(), T::F1));
                format!("(let {f} ({y} : int) : int = {body} in {})", self.int(&inner, d))
            }
            _ => self.call(env, d),
        }
    }

    /// A call to a random global with fresh arguments.
    fn call(&mut self, env: &Env, depth: u32) -> String {
        if self.globals.is_empty() {
            return self.int(env, depth);
        }
        let i = self.rng.gen_range(0..self.globals.len());
        let (name, params) = (self.globals[i].name.clone(), self.globals[i].params.clone());
        let args: Vec<String> = params.iter().map(|&t| self.arg(env, t, depth)).collect();
        format!("({name} {})", args.join(" "))
    }

    fn arg(&mut self, env: &Env, t: T, depth: u32) -> String {
        match t {
            T::Int => self.int(env, depth),
            T::List => self.list(env, depth),
            T::F1 => self.f1(env, depth),
            T::F2 => self.f2(env, depth),
        }
    }

    fn list(&mut self, env: &Env, depth: u32) -> String {
        match self.rng.gen_range(0..4) {
            0 => self.pick(env, T::List).unwrap_or_else(|| "[]".into()),
            1 => "[]".into(),
            2 => format!("({} :: {})", self.int(env, depth.saturating_sub(1)), self.list(env, depth.saturating_sub(1))),
            _ => {
                let d = depth.saturating_sub(1);
                format!("[{}; {}]", self.int(env, d), self.int(env, d))
            }
        }
    }

    fn globals_of(&self, params: &[T]) -> Vec<String> {
        self.globals.iter().filter(|g| g.params == params).map(|g| g.name.clone()).collect()
    }

    fn f1(&mut self, env: &Env, depth: u32) -> String {
        match self.rng.gen_range(0..6) {
            0 => {
                if let Some(f) = self.pick(env, T::F1) {
                    return f;
                }
            }
            1 => {
                if let Some(f) = self.pick(env, T::F2) {
                    return format!("({f} {})", self.int(env, depth.saturating_sub(1)));
                }
            }
            2 => {
                let gs = self.globals_of(&[T::Int]);
                if let Some(g) = gs.choose(&mut self.rng) {
                    return g.clone();
                }
            }
            _ => {}
        }
        let y = self.fresh("y");
        let mut inner = env.clone();
        inner.push((y.clone(), T::Int));
        format!("(fun ({y} : int) : int -> {})", self.int(&inner, depth.saturating_sub(1)))
    }

    fn f2(&mut self, env: &Env, depth: u32) -> String {
        match self.rng.gen_range(0..4) {
            0 => {
                if let Some(f) = self.pick(env, T::F2) {
                    return f;
                }
            }
            1 => {
                let gs = self.globals_of(&[T::Int, T::Int]);
                if let Some(g) = gs.choose(&mut self.rng) {
                    return g.clone();
                }
            }
            _ => {}
        }
        let (y, z) = (self.fresh("y"), self.fresh("z"));
        let mut inner = env.clone();
        inner.push((y.clone(), T::Int));
        inner.push((z.clone(), T::Int));
        format!("(fun ({y} : int) ({z} : int) : int -> {})", self.int(&inner, depth.saturating_sub(1)))
    }

    fn params(&mut self) -> Vec<T> {
        let n = self.rng.gen_range(1..=3);
        (0..n).map(|_| *[T::Int, T::Int, T::List, T::F1, T::F2].choose(&mut self.rng).unwrap()).collect()
    }

    fn header(&mut self, params: &[T], env: &mut Env) -> String {
        let mut out = String::new();
        for &t in params {
            let p = self.fresh(match t {
                T::Int => "n",
                T::List => "l",
                T::F1 => "f",
                T::F2 => "g",
            });
            out.push_str(&format!(" ({p} : {})", t.text()));
            env.push((p, t));
        }
        out
    }

    /// A global: plain, or a structural recursion over a list in
    /// continuation-passing style.
    fn global(&mut self, index: usize) -> String {
        let name = format!("g{index}");
        if self.rng.gen_bool(0.35) {
            return self.cps_global(name);
        }
        let params = self.params();
        let mut env = Env::new();
        let header = self.header(&params, &mut env);
        let body = self.int(&env, DEPTH);
        self.globals.push(Global { name: name.clone(), params });
        format!("let {name}{header} : int =\n  {body}\n")
    }

    fn cps_global(&mut self, name: String) -> String {
        let (l, k, x, t, r) = (self.fresh("l"), self.fresh("k"), self.fresh("x"), self.fresh("t"), self.fresh("r"));
        let mut base = vec![(k.clone(), T::F1)];
        let extra = self.rng.gen_bool(0.5).then(|| self.fresh("n"));
        if let Some(n) = &extra {
            base.push((n.clone(), T::Int));
        }
        let nil = self.int(&base.iter().filter(|(_, t)| *t == T::Int).cloned().collect(), 1);
        let mut inner = base.clone();
        inner.push((x.clone(), T::Int));
        inner.push((r.clone(), T::Int));
        inner.retain(|(_, t)| *t == T::Int);
        let step = self.int(&inner, 2);
        let extra_param = extra.as_ref().map(|n| format!(" ({n} : int)")).unwrap_or_default();
        let extra_arg = extra.as_ref().map(|n| format!(" {n}")).unwrap_or_default();
        let text = format!(
            "let rec {name} ({l} : int list) ({k} : int -> int){extra_param} : int =\n  \
             match {l} with\n  | [] -> {k} {nil}\n  \
             | {x} :: {t} -> {name} {t} (fun ({r} : int) : int -> {k} {step}){extra_arg}\n"
        );
        let mut params = vec![T::List, T::F1];
        if extra.is_some() {
            params.push(T::Int);
        }
        self.globals.push(Global { name, params });
        text
    }
}

/// The program for `seed`, with entry point `main`.
pub fn program(seed: u64) -> String {
    let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(seed), globals: Vec::new(), fresh: 0 };
    let count = g.rng.gen_range(1..=4);
    let mut out = String::new();
    for i in 0..count {
        out.push_str(&g.global(i));
        out.push('\n');
    }
    let env: Env = vec![("a".into(), T::Int), ("b".into(), T::Int), ("l".into(), T::List)];
    let mut calls = Vec::new();
    for i in 0..g.globals.len() {
        let (name, params) = (g.globals[i].name.clone(), g.globals[i].params.clone());
        let args: Vec<String> = params.iter().map(|&t| g.arg(&env, t, 2)).collect();
        calls.push(format!("{name} {}", args.join(" ")));
    }
    calls.push(g.int(&env, 2));
    let body = calls.iter().map(|c| format!("({c})")).collect::<Vec<_>>().join(" + ");
    out.push_str(&format!("let main (a : int) (b : int) (l : int list) : int =\n  {body}\n"));
    out
}
