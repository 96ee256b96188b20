"""Pure-Python twin of the sliding-graph component kernel.

Semantics are documented on the package wrapper; this module and the
compiled one must stay behaviourally identical.
"""

from __future__ import annotations

import itertools

IMPLEMENTATION = "python"


def sliding_component_count(x, xp, ys, yps, entry_bound):
    J = len(ys)
    rows = list(itertools.product(range(entry_bound + 1), repeat=J))
    F, Bd, nf, nb, base = [], [], [], [], []
    offF, offB = [], []
    total = 0
    for m in rows:
        offf, offb = [], []
        sf = sb = 0
        for j in range(J):
            offf.append(sf)
            offb.append(sb)
            sf += m[j] * ys[j]
            sb += yps[j] * m[j]
        F.append(sf)
        Bd.append(sb)
        nfm = sf**x
        nbm = xp**sb
        nf.append(nfm)
        nb.append(nbm)
        offF.append(offf)
        offB.append(offb)
        base.append(total)
        total += nfm * nbm
    if total == 0:
        return 0, 0

    parent = list(range(total))
    size = [1] * total

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra == rb:
            return
        if size[ra] < size[rb]:
            ra, rb = rb, ra
        parent[rb] = ra
        size[ra] += size[rb]

    for mi, m in enumerate(rows):
        nfm, nbm = nf[mi], nb[mi]
        if nfm == 0 or nbm == 0:
            continue
        Fm, Bdm, base_m = F[mi], Bd[mi], base[mi]
        pow_xp_m = [xp**p for p in range(Bdm)]
        for ni, nrow in enumerate(rows):
            nbn = nb[ni]
            if nbn == 0:
                continue
            if any(m[j] > 0 and nrow[j] == 0 for j in range(J)):
                continue
            Fn, Bdn, base_n = F[ni], Bd[ni], base[ni]
            pow_Fn = [Fn**p for p in range(x)]
            pow_xp_n = [xp**q for q in range(Bdn)]
            per_j = [
                list(itertools.product(range(nrow[j]), repeat=m[j])) for j in range(J)
            ]
            for rgrid in itertools.product(*per_j):
                T = [0] * Fm
                S = [0] * Bdm
                for j in range(J):
                    rj = rgrid[j]
                    for u in range(m[j]):
                        src = offF[mi][j] + u * ys[j]
                        dst = offF[ni][j] + rj[u] * ys[j]
                        for yv in range(ys[j]):
                            T[src + yv] = dst + yv
                    for ypv in range(yps[j]):
                        srcb = offB[mi][j] + ypv * m[j]
                        dstb = offB[ni][j] + ypv * nrow[j]
                        for u in range(m[j]):
                            S[srcb + u] = dstb + rj[u]
                FP = [0] * nfm
                for fidx in range(nfm):
                    acc, rem = 0, fidx
                    for p in range(x):
                        acc += T[rem % Fm] * pow_Fn[p]
                        rem //= Fm
                    FP[fidx] = acc
                BP = [0] * nbn
                for bidx in range(nbn):
                    acc = 0
                    for p in range(Bdm):
                        acc += ((bidx // pow_xp_n[S[p]]) % xp) * pow_xp_m[p]
                    BP[bidx] = acc
                for fidx in range(nfm):
                    a0 = base_m + fidx * nbm
                    b0 = base_n + FP[fidx] * nbn
                    for bj in range(nbn):
                        union(a0 + BP[bj], b0 + bj)

    components = sum(1 for i in range(total) if find(i) == i)
    return total, components
