/* Stand-in for an OpenSSL 1.0.1f build: version banner plus the heartbeat handlers. */
#ifdef HIDE_SYMBOLS
#define API __attribute__((visibility("hidden")))
#else
#define API __attribute__((visibility("default")))
#endif

void *memcpy(void *dst, const void *src, unsigned long n);

const char openssl_version_text[] = "OpenSSL 1.0.1f 6 Jan 2014";
const char ssl_version_str[] = "SSLv3 part of OpenSSL 1.0.1f 6 Jan 2014";
const char heartbeat_err[] = "heartbeat payload too long";

API int dtls1_process_heartbeat(unsigned char *out, const unsigned char *p, unsigned long n)
{
    memcpy(out, p, n);
    return (int)n;
}

API int tls1_process_heartbeat(unsigned char *out, const unsigned char *p, unsigned long n)
{
    return dtls1_process_heartbeat(out, p, n) + 1;
}

API int SSL_library_init(void)
{
    return heartbeat_err[0] + openssl_version_text[0] + ssl_version_str[0];
}
