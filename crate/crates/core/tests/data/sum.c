int sum(int n) {
  int i = 0;
  int s = 0;
  while (i < n) {
    s = s + 1;
    i = i + 1;
  }
  return s;
}

int mean(int total, int count) {
  return total / count;
}

void main() {
  int s = sum(100);
  int m = mean(s, 4);
}
