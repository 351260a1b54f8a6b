import org.junit.Test;

public class LabeledBreakTest {

    @Test
    public void findsPair() {
        int[] xs = {1, 4, 6, 9};
        int found = -1;
        outer:
        for (int i = 0; i < xs.length; i++) {
            for (int j = i + 1; j < xs.length; j++) {
                if (xs[i] + xs[j] == 10) {
                    found = i;
                    break outer;
                }
                if (xs[j] > 8) continue outer;
            }
        }
        assertEquals(0, found);
    }
}
