#pragma once

// Index maps for boundary extension. Both are periodic so any offset is valid.

namespace gmcfuse::detail {

// Whole-sample symmetric: ... 2 1 | 0 1 2 ... n-1 | n-2 ...
inline int reflect_whole(int p, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  int m = p % period;
  if (m < 0) m += period;
  return m >= n ? period - m : m;
}

// Half-sample symmetric: ... 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
inline int reflect_half(int p, int n) {
  const int period = 2 * n;
  int m = p % period;
  if (m < 0) m += period;
  return m >= n ? period - 1 - m : m;
}

}  // namespace gmcfuse::detail
