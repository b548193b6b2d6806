// placeholder until the full CLI lands
int main() { return 0; }
