"""Brute-force variant labeling oracle.

A deliberately plain re-implementation of the sliding-window scan and
threshold cascade, sharing no code with the production labeler. Float
ratios, list comprehensions, no early exits beyond what the scan defines.
"""

from __future__ import annotations


def trend_of(pitches):
    out = []
    for i in range(len(pitches) - 1):
        diff = pitches[i + 1] - pitches[i]
        out.append(1 if diff > 0 else (-1 if diff < 0 else 0))
    return out


def ordered_subseq(small, big):
    i = 0
    for x in big:
        if i < len(small) and small[i] == x:
            i += 1
    return i == len(small)


def reference_label_variants(clip, motif, step=16):
    """Returns (type, start, end) tuples in scan order."""
    notes = [(int(n.start), int(n.duration), n.pitch) for n in clip.melody]
    ends = [s + d for s, d, _ in notes]
    ends.append(motif.end)
    ends.extend(v.end for v in clip.variant_labels)
    end_time = max(ends) if ends else 0

    m_notes = [n for n in notes if motif.start <= n[0] < motif.end]
    st_m = [s - motif.start for s, _, _ in m_notes]
    pitch_m = [p for _, _, p in m_notes]
    trend_m = trend_of(pitch_m)

    win_len = motif.end - motif.start
    win = motif.end
    found = []
    while win + win_len <= end_time:
        if any(s < win + win_len and win < e for _, s, e in found):
            win += step
            continue
        w_notes = [n for n in notes if win <= n[0] < win + win_len]
        if len(w_notes) >= 2:
            st_c = [s - win for s, _, _ in w_notes]
            pitch_c = [p for _, _, p in w_notes]
            trend_c = trend_of(pitch_c)
            vtype = None
            if st_m == st_c:
                pmr = sum(1 for a, b in zip(pitch_m, pitch_c) if a == b) / len(pitch_m)
                tmr = sum(1 for a, b in zip(trend_m, trend_c) if a == b) / len(trend_m)
                if tmr >= 0.6:
                    vtype = 1 if pmr >= 0.6 else 2
                elif 0.2 <= tmr < 0.6:
                    vtype = 3
                else:
                    vtype = 5
            elif len(st_m) < len(st_c):
                if ordered_subseq(st_m, st_c) and ordered_subseq(trend_m, trend_c):
                    vtype = 4
            elif len(st_c) < len(st_m):
                if ordered_subseq(st_c, st_m) and ordered_subseq(trend_c, trend_m):
                    vtype = 4
            if vtype is not None:
                found.append((vtype, win, win + win_len))
        win += step
    return found
