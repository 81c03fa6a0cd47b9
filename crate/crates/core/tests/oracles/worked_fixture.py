from decimal import Decimal as D, getcontext
getcontext().prec = 50
eps = D("1e-6")
a1 = [D(100), D(10), D(0)]
a2 = [D(2), D(5), D(3)]
bible = [1, 0, 1]
s1 = [D("0.8"), D("0.5"), D("0.3")]
s2 = [D("0.75"), D("0.45"), D("0.32")]
d1 = [D(50), D(20), D(80)]

def pearson(x, y):
    n = len(x); mx = sum(x)/n; my = sum(y)/n
    sxy = sum((a-mx)*(b-my) for a, b in zip(x, y))
    sxx = sum((a-mx)**2 for a in x); syy = sum((b-my)**2 for b in y)
    return sxy / (sxx*syy).sqrt()

print("r_a1a2", pearson(a1, a2), "r_s1s2", pearson(s1, s2))
merged = [(D("0.6")*a + D("0.4")*b) / D("1.0") for a, b in zip(s1, s2)]

def norm(col, log):
    v = [x + 1 for x in col]
    if log:
        v = [(x + eps).ln() for x in v]
    lo, hi = min(v), max(v)
    return [max((x - lo) / (hi - lo), eps) for x in v]

na1 = norm(a1, True); na2 = norm(a2, False); ns = norm(merged, False); nd = norm(d1, False)
def pw(x, w): return (w * x.ln()).exp()
for i in range(3):
    gai = pw(na1[i], D("0.5")/D("0.8")) * pw(na2[i], D("0.3")/D("0.8"))
    gs = ns[i]; gd = nd[i]
    sg = ((gai.ln() + gs.ln() + gd.ln()) / 3).exp()
    p = 1 - D("0.2") * (1 - bible[i])
    s = sg * p
    print(f"L{i+1}", "merged", format(merged[i], ".17g"),
          "na1", format(na1[i], ".17g"), "na2", format(na2[i], ".17g"),
          "ns", format(ns[i], ".17g"), "nd", format(nd[i], ".17g"))
    print(f"L{i+1}", "G_ai", format(gai, ".17g"), "G_s", format(gs, ".17g"), "G_d", format(gd, ".17g"),
          "P", format(p, ".17g"), "S", format(s, ".17g"))

# Four-feature group score check.
x = [D("0.31"), D("0.77"), D("0.05"), D("0.93")]
w = [D("0.4"), D("0.3"), D("0.2"), D("0.1")]
g = D(1)
for xi, wi in zip(x, w):
    g *= pw(xi, wi)
print("G4", format(g, ".17g"))
