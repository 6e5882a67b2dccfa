/* A first-party library matching no tracked product. */
const char app_greeting[] = "hello from native code";
const char app_config_key[] = "render.quality";

int compute_checksum(const unsigned char *p, unsigned long n)
{
    int s = 0;
    for (unsigned long i = 0; i < n; i++)
        s += p[i];
    return s + app_greeting[0] + app_config_key[0];
}
