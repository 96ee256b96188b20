# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sliding-graph component kernel; mirrors _slide_py exactly."""

from libc.stdlib cimport free, malloc
from libc.string cimport memset

IMPLEMENTATION = "cython"

ctypedef long long i64


cdef inline i64 ipow(i64 b, i64 e) noexcept nogil:
    cdef i64 r = 1
    while e > 0:
        r *= b
        e -= 1
    return r


cdef inline i64 uf_find(i64* parent, i64 i) noexcept nogil:
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


cdef inline void uf_union(i64* parent, i64* size, i64 a, i64 b) noexcept nogil:
    cdef i64 ra = uf_find(parent, a)
    cdef i64 rb = uf_find(parent, b)
    cdef i64 tmp
    if ra == rb:
        return
    if size[ra] < size[rb]:
        tmp = ra
        ra = rb
        rb = tmp
    parent[rb] = ra
    size[ra] += size[rb]


def sliding_component_count(x, xp, ys, yps, entry_bound):
    cdef i64 cx = x
    cdef i64 cxp = xp
    cdef i64 bound = entry_bound
    cdef i64 J = len(ys)
    cdef i64 radix = bound + 1
    cdef i64 R = ipow(radix, J)

    cdef i64* cys = <i64*> malloc(max(J, 1) * sizeof(i64))
    cdef i64* cyps = <i64*> malloc(max(J, 1) * sizeof(i64))
    cdef i64 j
    for j in range(J):
        cys[j] = ys[j]
        cyps[j] = yps[j]

    # Per-row data: entries, forward/backward sizes, counts, offsets, id bases.
    cdef i64* rowv = <i64*> malloc(max(R * J, 1) * sizeof(i64))
    cdef i64* F = <i64*> malloc(R * sizeof(i64))
    cdef i64* Bd = <i64*> malloc(R * sizeof(i64))
    cdef i64* nf = <i64*> malloc(R * sizeof(i64))
    cdef i64* nb = <i64*> malloc(R * sizeof(i64))
    cdef i64* base = <i64*> malloc(R * sizeof(i64))
    cdef i64* offF = <i64*> malloc(max(R * J, 1) * sizeof(i64))
    cdef i64* offB = <i64*> malloc(max(R * J, 1) * sizeof(i64))

    cdef i64 ri, rem, sf, sb, total, maxF, maxBd, maxnf, maxnb
    total = 0
    maxF = maxBd = maxnf = maxnb = 0
    for ri in range(R):
        rem = ri
        sf = 0
        sb = 0
        for j in range(J):
            rowv[ri * J + j] = rem % radix
            rem //= radix
            offF[ri * J + j] = sf
            offB[ri * J + j] = sb
            sf += rowv[ri * J + j] * cys[j]
            sb += cyps[j] * rowv[ri * J + j]
        F[ri] = sf
        Bd[ri] = sb
        nf[ri] = ipow(sf, cx)
        nb[ri] = ipow(cxp, sb)
        base[ri] = total
        total += nf[ri] * nb[ri]
        if sf > maxF:
            maxF = sf
        if sb > maxBd:
            maxBd = sb
        if nf[ri] > maxnf:
            maxnf = nf[ri]
        if nb[ri] > maxnb:
            maxnb = nb[ri]

    if total == 0:
        free(cys); free(cyps); free(rowv); free(F); free(Bd)
        free(nf); free(nb); free(base); free(offF); free(offB)
        return 0, 0

    cdef i64* parent = <i64*> malloc(total * sizeof(i64))
    cdef i64* usize = <i64*> malloc(total * sizeof(i64))
    cdef i64 i
    for i in range(total):
        parent[i] = i
        usize[i] = 1

    cdef i64* T = <i64*> malloc(max(maxF, 1) * sizeof(i64))
    cdef i64* S = <i64*> malloc(max(maxBd, 1) * sizeof(i64))
    cdef i64* FP = <i64*> malloc(max(maxnf, 1) * sizeof(i64))
    cdef i64* BP = <i64*> malloc(max(maxnb, 1) * sizeof(i64))
    cdef i64* pow_Fn = <i64*> malloc(max(cx, 1) * sizeof(i64))
    cdef i64* pow_xp_m = <i64*> malloc(max(maxBd, 1) * sizeof(i64))
    cdef i64* pow_xp_n = <i64*> malloc(max(maxBd, 1) * sizeof(i64))
    # Mediator odometer: one slot per (j, u) with u < m_j.
    cdef i64* slot_j = <i64*> malloc(max(J * bound, 1) * sizeof(i64))
    cdef i64* slot_val = <i64*> malloc(max(J * bound, 1) * sizeof(i64))
    cdef i64* slot_off = <i64*> malloc(max(J, 1) * sizeof(i64))

    cdef i64 mi, ni, mj, nj, nslots, ok, p, u, yv, ypv
    cdef i64 Fm, Bdm, nfm, nbm, base_m, Fn, Bdn, nbn, base_n
    cdef i64 src, dst, acc, fidx, bidx, a0, b0, bj, carry

    for mi in range(R):
        nfm = nf[mi]
        nbm = nb[mi]
        if nfm == 0 or nbm == 0:
            continue
        Fm = F[mi]
        Bdm = Bd[mi]
        base_m = base[mi]
        for p in range(Bdm):
            pow_xp_m[p] = ipow(cxp, p)
        for ni in range(R):
            nbn = nb[ni]
            if nbn == 0:
                continue
            ok = 1
            for j in range(J):
                if rowv[mi * J + j] > 0 and rowv[ni * J + j] == 0:
                    ok = 0
                    break
            if ok == 0:
                continue
            Fn = F[ni]
            Bdn = Bd[ni]
            base_n = base[ni]
            for p in range(cx):
                pow_Fn[p] = ipow(Fn, p)
            for p in range(Bdn):
                pow_xp_n[p] = ipow(cxp, p)
            nslots = 0
            for j in range(J):
                slot_off[j] = nslots
                for u in range(rowv[mi * J + j]):
                    slot_j[nslots] = j
                    slot_val[nslots] = 0
                    nslots += 1
            while True:
                # Transport tables for the current mediator grid.
                for j in range(J):
                    mj = rowv[mi * J + j]
                    nj = rowv[ni * J + j]
                    for u in range(mj):
                        src = offF[mi * J + j] + u * cys[j]
                        dst = offF[ni * J + j] + slot_val[slot_off[j] + u] * cys[j]
                        for yv in range(cys[j]):
                            T[src + yv] = dst + yv
                    for ypv in range(cyps[j]):
                        src = offB[mi * J + j] + ypv * mj
                        dst = offB[ni * J + j] + ypv * nj
                        for u in range(mj):
                            S[src + u] = dst + slot_val[slot_off[j] + u]
                for fidx in range(nfm):
                    acc = 0
                    rem = fidx
                    for p in range(cx):
                        acc += T[rem % Fm] * pow_Fn[p]
                        rem //= Fm
                    FP[fidx] = acc
                for bidx in range(nbn):
                    acc = 0
                    for p in range(Bdm):
                        acc += ((bidx // pow_xp_n[S[p]]) % cxp) * pow_xp_m[p]
                    BP[bidx] = acc
                for fidx in range(nfm):
                    a0 = base_m + fidx * nbm
                    b0 = base_n + FP[fidx] * nbn
                    for bj in range(nbn):
                        uf_union(parent, usize, a0 + BP[bj], b0 + bj)
                # Advance the odometer.
                carry = 1
                for p in range(nslots):
                    if carry == 0:
                        break
                    slot_val[p] += 1
                    if slot_val[p] >= rowv[ni * J + slot_j[p]]:
                        slot_val[p] = 0
                    else:
                        carry = 0
                if carry == 1:
                    break

    cdef i64 components = 0
    for i in range(total):
        if uf_find(parent, i) == i:
            components += 1

    free(cys); free(cyps); free(rowv); free(F); free(Bd)
    free(nf); free(nb); free(base); free(offF); free(offB)
    free(parent); free(usize)
    free(T); free(S); free(FP); free(BP)
    free(pow_Fn); free(pow_xp_m); free(pow_xp_n)
    free(slot_j); free(slot_val); free(slot_off)
    return int(total), int(components)
